#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alignforge/jsonl.hpp"

namespace alignforge {

// One normalized instruction record. Immutable once emitted by ingest;
// the id is content-derived so re-ingestion reproduces it.
struct Sample {
    std::string id;
    std::string instruction;
    std::string original_reply;
    std::string source;
    std::string lang;          // zh | en | other
    std::string rule_category; // always set, "uncategorized" fallback
    std::map<std::string, std::string> meta;

    json to_json() const;
    static Sample from_json(const json& j);
};

// Builds the content-derived id for (source, instruction, original_reply).
std::string sample_id(const std::string& source, const std::string& instruction,
                      const std::string& original_reply);

struct LabeledSample {
    Sample sample;
    std::string label;     // "Primary-Secondary"
    bool label_ok = false; // format-valid

    json to_json() const;
    static LabeledSample from_json(const json& j);
};

// Per-reply quality features. Each feature may be absent when the call that
// produces it failed; flags record why.
struct QualityFeatures {
    std::optional<double> perplexity; // >= 1 when present
    std::optional<double> safety;     // 1 | 0.5 | 0
    std::optional<double> quality;    // 1 | 0.5 | 0
    std::vector<std::string> flags;

    json to_json() const;
    static QualityFeatures from_json(const json& j);
};

enum class ReplySource { original, large_model, small_model };

std::string to_string(ReplySource s);
ReplySource reply_source_from_string(const std::string& s);

// "generation_failed" sentinel text used for model candidates whose
// provider call failed; such candidates carry a flag and never reach selection.
inline constexpr const char* kGenerationFailed = "generation_failed";

struct ReplyCandidate {
    ReplySource source = ReplySource::original;
    std::string text;
    std::vector<std::string> flags;
    std::optional<QualityFeatures> features;

    // True when the candidate may be ranked: not failed and non-empty.
    bool usable() const;

    json to_json() const;
    static ReplyCandidate from_json(const json& j);
};

struct EnrichedSample {
    LabeledSample labeled;
    std::vector<ReplyCandidate> replies; // <= 3, sources unique, original always present

    const ReplyCandidate* find(ReplySource s) const;

    json to_json() const;
    static EnrichedSample from_json(const json& j);
};

struct SftRecord {
    std::string id;
    std::string instruction;
    std::string reply;
    ReplySource source = ReplySource::original;
    std::string label;
    QualityFeatures features;
};

struct KtoRecord {
    std::string id;
    std::string instruction;
    std::string reply;
    std::string tag; // desirable | undesirable
    QualityFeatures features;
};

} // namespace alignforge
