#include "alignforge/dedup.hpp"

#include <algorithm>

#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"
#include "alignforge/text.hpp"

namespace alignforge {

void DedupConfig::validate() const {
    if (k < 0) throw ConfigError("dedup k must be non-negative");
    int b = effective_blocks();
    if (b < k + 1) throw ConfigError("dedup blocks must be >= k + 1");
    if (b > 64) throw ConfigError("dedup blocks must be <= 64");
}

std::vector<std::pair<std::string, uint32_t>> tokenize(std::string_view instruction) {
    std::vector<std::string> tokens;
    auto cps = utf8_codepoints(instruction);

    auto is_word_cp = [](char32_t cp) {
        if (is_cjk(cp)) return false;
        if (cp < 0x80)
            return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
        if (cp >= 0x3000 && cp <= 0x303F) return false; // CJK symbols and punctuation
        if (cp >= 0xFF00 && cp <= 0xFF65) return false; // fullwidth punctuation forms
        return true;
    };

    size_t i = 0;
    const size_t n = cps.size();
    while (i < n) {
        if (is_cjk(cps[i])) {
            size_t j = i;
            while (j < n && is_cjk(cps[j])) j++;
            if (j - i == 1) {
                tokens.push_back(utf8_encode(cps[i]));
            } else {
                for (size_t p = i; p + 1 < j; p++)
                    tokens.push_back(utf8_encode(cps[p]) + utf8_encode(cps[p + 1]));
            }
            i = j;
        } else if (is_word_cp(cps[i])) {
            size_t j = i;
            std::string word;
            while (j < n && is_word_cp(cps[j])) {
                char32_t cp = cps[j];
                if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
                word += utf8_encode(cp);
                j++;
            }
            tokens.push_back(std::move(word));
            i = j;
        } else {
            i++; // whitespace / punctuation
        }
    }

    // aggregate to (token, count) in first-appearance order
    std::vector<std::pair<std::string, uint32_t>> features;
    std::unordered_map<std::string, size_t> pos;
    for (auto& t : tokens) {
        auto it = pos.find(t);
        if (it == pos.end()) {
            pos.emplace(t, features.size());
            features.emplace_back(std::move(t), 1);
        } else {
            features[it->second].second++;
        }
    }
    return features;
}

uint64_t simhash(const std::vector<std::pair<std::string, uint32_t>>& features, uint64_t seed) {
    int64_t sums[64] = {0};
    for (const auto& [tok, w] : features) {
        uint64_t h = murmur64(tok, seed);
        for (int b = 0; b < 64; b++) {
            if ((h >> b) & 1)
                sums[b] += int64_t(w);
            else
                sums[b] -= int64_t(w);
        }
    }
    uint64_t bits = 0;
    for (int b = 0; b < 64; b++)
        if (sums[b] > 0) bits |= (uint64_t(1) << b);
    return bits;
}

uint64_t fingerprint_instruction(std::string_view instruction, uint64_t seed) {
    return simhash(tokenize(instruction), seed);
}

SimhashIndex::SimhashIndex(const DedupConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    buckets_.resize(size_t(cfg_.effective_blocks()));
}

uint64_t SimhashIndex::block_key(uint64_t bits, int block) const {
    int nb = cfg_.effective_blocks();
    int lo = block * 64 / nb;
    int hi = (block + 1) * 64 / nb;
    int width = hi - lo;
    uint64_t mask = width >= 64 ? ~uint64_t(0) : ((uint64_t(1) << width) - 1);
    return (bits >> lo) & mask;
}

SimhashIndex::InsertResult SimhashIndex::insert(const Fingerprint& fp) {
    const int nb = cfg_.effective_blocks();

    uint32_t best = UINT32_MAX;
    int best_dist = 0;
    for (int b = 0; b < nb; b++) {
        auto it = buckets_[size_t(b)].find(block_key(fp.bits, b));
        if (it == buckets_[size_t(b)].end()) continue;
        for (uint32_t idx : it->second) {
            if (idx >= best) continue; // only earlier entries can improve
            int d = hamming(bits_[idx], fp.bits);
            if (d <= cfg_.k) {
                best = idx;
                best_dist = d;
            }
        }
    }

    if (best != UINT32_MAX)
        return {false, ids_[best], best_dist};

    auto idx = uint32_t(bits_.size());
    bits_.push_back(fp.bits);
    ids_.push_back(fp.sample_id);
    for (int b = 0; b < nb; b++)
        buckets_[size_t(b)][block_key(fp.bits, b)].push_back(idx);
    return {true, {}, 0};
}

json DropRecord::to_json() const {
    json j;
    j["sample_id"] = sample_id;
    j["duplicate_of"] = duplicate_of;
    j["distance"] = distance;
    return j;
}

std::optional<DropRecord> Deduper::feed(const Sample& s) {
    Fingerprint fp{fingerprint_instruction(s.instruction, cfg_.hash_seed), s.id};
    auto res = index_.insert(fp);
    if (res.unique) return std::nullopt;
    return DropRecord{s.id, res.duplicate_of, res.distance};
}

DedupResult dedup_stream(const std::vector<Sample>& samples, const DedupConfig& cfg) {
    DedupResult out;
    Deduper dd(cfg);
    for (const auto& s : samples) {
        if (auto drop = dd.feed(s))
            out.dropped.push_back(std::move(*drop));
        else
            out.kept.push_back(s);
    }
    return out;
}

} // namespace alignforge
