#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "alignforge/jsonl.hpp"
#include "alignforge/sample.hpp"

namespace alignforge {

// Names the instruction/reply fields of a source dataset, with an optional
// multi-turn flattening rule applied when the direct fields are absent.
struct FieldMapping {
    std::string instruction_field = "instruction";
    std::string reply_field = "output";

    // Multi-turn flattening. Disabled when turns_field is empty.
    std::string turns_field;                 // e.g. "conversations"
    std::string role_key = "from";
    std::string content_key = "value";
    std::string user_role = "human";
    std::string assistant_role = "assistant";
    std::string mode = "first_turn";         // first_turn | concat

    json to_json() const;
    static FieldMapping from_json(const json& j);
};

struct CategoryRule {
    std::string category;
    std::vector<std::string> source_contains; // matched case-insensitively against source name
    std::vector<std::string> keywords;        // matched against the instruction (ASCII case-folded)
};

struct RuleSet {
    std::vector<CategoryRule> rules; // ordered, first match wins
    std::string fallback = "uncategorized";

    static RuleSet from_json(const json& j);
    static RuleSet load(const std::string& path);
};

struct CorpusManifest {
    std::string source;
    uint64_t record_count = 0;
    uint64_t accepted = 0;
    uint64_t rejected = 0;
    std::map<std::string, uint64_t> reject_reasons;

    json to_json() const;
};

// First matching rule wins; no match -> fallback category. Total function.
std::string rule_categorize(const Sample& s, const RuleSet& rules);

// Streams one line-delimited JSON file into normalized Samples. Malformed
// lines are counted and reported, never abort the stream.
//   unmappable line -> rejected, reason "schema"
//   empty instruction after trimming -> rejected, reason "empty"
CorpusManifest ingest_file(const std::string& path, const std::string& source_name,
                           const FieldMapping& mapping, const RuleSet& rules,
                           const std::function<void(Sample&&)>& emit);

// Convenience wrapper collecting into a vector.
CorpusManifest ingest_file(const std::string& path, const std::string& source_name,
                           const FieldMapping& mapping, const RuleSet& rules,
                           std::vector<Sample>& out);

} // namespace alignforge
