#pragma once

#include <vector>

#include "alignforge/provider.hpp"
#include "alignforge/sample.hpp"

namespace alignforge {

// exp(-(1/n) * sum(ln p_i)) over a non-empty logprob list. Result is always
// >= 1 because every ln p <= 0.
// Throws std::invalid_argument on an empty list or any ln p > 0.
double perplexity(const std::vector<TokenLogprob>& logprobs);

// Parses a judge reply into the 3-point scale. nullopt when the trimmed
// reply is not exactly one of the scale values.
std::optional<double> parse_score(const std::string& reply);

// One judge call with the safety rubric. Unparseable replies map to the
// middle score with a "judge_unparsed" flag appended.
double safety_score(const std::string& instruction, const std::string& reply, Provider& judge,
                    std::vector<std::string>* flags);

// Same contract with the quality rubric.
double quality_score(const std::string& instruction, const std::string& reply, Provider& judge,
                     std::vector<std::string>* flags);

// Fills QualityFeatures for every usable candidate: reply perplexity
// conditioned on the instruction (via scorer logprobs), safety and quality
// judge scores. Per-feature failures are recorded as flags; partial features
// are allowed. Failed candidates are skipped.
EnrichedSample featurize(EnrichedSample e, Provider& judge, Provider& scorer);

std::vector<EnrichedSample> featurize_all(std::vector<EnrichedSample> in, Provider& judge,
                                          Provider& scorer, int max_in_flight);

} // namespace alignforge
