#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alignforge/sample.hpp"

namespace alignforge {

struct DiversityConfig {
    uint64_t per_label_cap = 0;          // quota Q; ignored when target_total set
    std::optional<uint64_t> target_total;
    uint64_t seed = 0;
};

struct BalanceReport {
    uint64_t cap_used = 0;
    uint64_t total_in = 0;
    uint64_t total_kept = 0;
    double entropy_before = 0.0;
    double entropy_after = 0.0;
    std::map<std::string, std::pair<uint64_t, uint64_t>> per_label; // before/after

    json to_json() const;
};

// Shannon entropy (nats) of a label histogram.
double label_entropy(const std::map<std::string, uint64_t>& counts);

// Flattens the label distribution: per label keep min(count, Q) members
// chosen by a shuffle keyed by hash(label, seed), output in stable input
// order. When target_total is set, Q is the largest cap with
// sum(min(count, Q)) <= target_total, found by integer bisection.
std::vector<LabeledSample> balance(const std::vector<LabeledSample>& in,
                                   const DiversityConfig& cfg, BalanceReport* report);

} // namespace alignforge
