#pragma once

#include "alignforge/provider.hpp"
#include "alignforge/sample.hpp"

namespace alignforge {

struct RegenConfig {
    double temperature = 0.7;
    int max_tokens = 1024;
};

// Attaches the three reply candidates: the original reply plus one
// regeneration from each provider. The instruction is sent verbatim as the
// user message with no system prompt. A provider failure flags that
// candidate as generation_failed; the sample is never dropped.
EnrichedSample regenerate(const LabeledSample& s, Provider& large, Provider& small,
                          const RegenConfig& cfg);

std::vector<EnrichedSample> regenerate_all(const std::vector<LabeledSample>& samples,
                                           Provider& large, Provider& small,
                                           const RegenConfig& cfg, int max_in_flight);

} // namespace alignforge
