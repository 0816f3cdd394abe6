#include "alignforge/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"

namespace alignforge {

json BalanceReport::to_json() const {
    json j;
    j["cap_used"] = cap_used;
    j["total_in"] = total_in;
    j["total_kept"] = total_kept;
    j["entropy_before"] = entropy_before;
    j["entropy_after"] = entropy_after;
    json per = json::object();
    for (const auto& [label, ba] : per_label)
        per[label] = {{"before", ba.first}, {"after", ba.second}};
    j["per_label"] = per;
    return j;
}

double label_entropy(const std::map<std::string, uint64_t>& counts) {
    uint64_t total = 0;
    for (const auto& [_, c] : counts) total += c;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        if (c == 0) continue;
        double p = double(c) / double(total);
        h -= p * std::log(p);
    }
    return h;
}

std::vector<LabeledSample> balance(const std::vector<LabeledSample>& in,
                                   const DiversityConfig& cfg, BalanceReport* report) {
    // phase 1: histogram and member positions per label
    std::map<std::string, std::vector<size_t>> members;
    for (size_t i = 0; i < in.size(); i++) members[in[i].label].push_back(i);

    std::map<std::string, uint64_t> before;
    uint64_t max_count = 0;
    for (const auto& [label, idx] : members) {
        before[label] = idx.size();
        max_count = std::max<uint64_t>(max_count, idx.size());
    }

    auto kept_with_cap = [&](uint64_t q) {
        uint64_t total = 0;
        for (const auto& [_, idx] : members) total += std::min<uint64_t>(idx.size(), q);
        return total;
    };

    uint64_t q = cfg.per_label_cap;
    if (cfg.target_total) {
        uint64_t target = *cfg.target_total;
        if (members.empty()) {
            q = 1;
        } else if (kept_with_cap(1) > target) {
            throw ConfigError("target_total " + std::to_string(target) +
                              " is below the label count " + std::to_string(members.size()) +
                              "; no per-label cap can satisfy it");
        } else {
            uint64_t lo = 1, hi = max_count; // invariant: kept_with_cap(lo) <= target
            while (lo < hi) {
                uint64_t mid = lo + (hi - lo + 1) / 2;
                if (kept_with_cap(mid) <= target)
                    lo = mid;
                else
                    hi = mid - 1;
            }
            q = lo;
        }
    }
    if (q < 1) throw ConfigError("per_label_cap must be >= 1");

    // phase 2: per-label seeded selection, labels in sorted order
    std::vector<char> keep(in.size(), 0);
    for (const auto& [label, idx] : members) {
        if (idx.size() <= q) {
            for (size_t i : idx) keep[i] = 1;
            continue;
        }
        std::vector<size_t> perm = idx;
        std::mt19937_64 rng(murmur64(label, cfg.seed));
        std::shuffle(perm.begin(), perm.end(), rng);
        for (uint64_t i = 0; i < q; i++) keep[perm[i]] = 1;
    }

    std::vector<LabeledSample> out;
    std::map<std::string, uint64_t> after;
    for (size_t i = 0; i < in.size(); i++) {
        if (!keep[i]) continue;
        after[in[i].label]++;
        out.push_back(in[i]);
    }

    if (report) {
        report->cap_used = q;
        report->total_in = in.size();
        report->total_kept = out.size();
        report->entropy_before = label_entropy(before);
        report->entropy_after = label_entropy(after);
        for (const auto& [label, c] : before)
            report->per_label[label] = {c, after.count(label) ? after[label] : 0};
    }
    return out;
}

} // namespace alignforge
