#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "alignforge/provider.hpp"
#include "alignforge/sample.hpp"

namespace alignforge {

struct LabelStats {
    std::map<std::string, uint64_t> counts; // over the full input stream
    uint64_t total = 0;
    std::set<std::string> kept_labels;

    json to_json() const;
};

// Parses a judge reply into a normalized "Primary-Secondary" label. Accepts
// the full-width separator and normalizes it; the whole trimmed reply must
// contain exactly one separator with non-empty parts. Never throws.
std::pair<std::string, bool> parse_label(const std::string& reply);

// One judge call with the classification system prompt and the instruction
// as user text. Provider failures yield label "provider_failed"; replies
// that do not parse yield label "unparsed". The sample is always retained.
LabeledSample classify_sample(const Sample& s, Provider& judge);

// Concurrent labeling of a batch; output index i corresponds to input i.
std::vector<LabeledSample> classify_all(const std::vector<Sample>& samples, Provider& judge,
                                        int max_in_flight);

// Two-phase low-frequency label pruning: count, then drop samples whose
// label count < min_freq, whose label failed to parse, or whose label is
// denylisted.
std::vector<LabeledSample> prune_labels(const std::vector<LabeledSample>& in, uint64_t min_freq,
                                        const std::set<std::string>& denylist, LabelStats* stats);

std::set<std::string> load_denylist(const std::string& path);

} // namespace alignforge
