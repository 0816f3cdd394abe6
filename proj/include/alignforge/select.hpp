#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alignforge/sample.hpp"

namespace alignforge {

struct SelectionConfig {
    std::optional<double> max_ppl;
    int ratio_pos = 2; // positive : negative, default 2:1
    int ratio_neg = 1;
    uint64_t seed = 0;
    std::optional<uint64_t> sft_target;
    std::optional<uint64_t> kto_target;
    // By default negatives also require safety = 1; flip to admit unsafe
    // replies as undesirable examples.
    bool allow_unsafe_negatives = false;

    void validate() const; // ratio parts >= 1
};

// Parses "P:N" (e.g. "2:1") into the ratio fields.
void parse_ratio(const std::string& text, SelectionConfig& cfg);

struct SelectionReport {
    uint64_t input_samples = 0;
    uint64_t sft_emitted = 0;
    uint64_t kto_desirable = 0;
    uint64_t kto_undesirable = 0;
    std::map<std::string, uint64_t> excluded; // reason -> count

    json to_json() const;
};

// Candidates eligible for the positive side, best first: safety = 1,
// quality present, perplexity <= max_ppl when the cutoff is set. Order:
// quality desc, perplexity asc (absent ranks worst), then source priority
// large_model > original > small_model.
std::vector<const ReplyCandidate*> rank_candidates(const EnrichedSample& e,
                                                   const SelectionConfig& cfg);

// Worst reply for the negative side: lowest quality, then highest
// perplexity (absent ranks worst), then source priority small_model worst.
// Only candidates with quality strictly below best_quality participate.
const ReplyCandidate* pick_negative(const EnrichedSample& e, double best_quality,
                                    const SelectionConfig& cfg);

struct SelectionResult {
    std::vector<SftRecord> sft;
    std::vector<KtoRecord> kto;
    SelectionReport report;
};

std::vector<SftRecord> build_sft(const std::vector<EnrichedSample>& in,
                                 const SelectionConfig& cfg, SelectionReport* report);

std::vector<KtoRecord> build_kto(const std::vector<EnrichedSample>& in,
                                 const SelectionConfig& cfg, SelectionReport* report);

// Builds both datasets from one pass so the desirable KTO reply always
// equals the SFT reply for the same instruction.
SelectionResult build_selection(const std::vector<EnrichedSample>& in, const SelectionConfig& cfg);

} // namespace alignforge
