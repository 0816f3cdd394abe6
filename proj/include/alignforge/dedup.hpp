#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "alignforge/sample.hpp"

namespace alignforge {

struct DedupConfig {
    int k = 3;             // Hamming tolerance
    int blocks = 0;        // 0 -> k + 1
    uint64_t hash_seed = 0;

    int effective_blocks() const { return blocks > 0 ? blocks : k + 1; }
    void validate() const; // blocks >= k + 1, 1 <= blocks <= 64, k >= 0
};

struct Fingerprint {
    uint64_t bits = 0;
    std::string sample_id;
};

// (token, weight) pairs in first-appearance order, weight = occurrence count.
// Non-CJK runs yield lowercase words delimited by whitespace/ASCII punctuation;
// CJK runs yield character bigrams (a run of length 1 yields the character itself).
std::vector<std::pair<std::string, uint32_t>> tokenize(std::string_view instruction);

// Classic simhash over weighted features: per bit position, sum +w/-w by the
// token hash bit; final bit = 1 iff sum > 0 (tie -> 0). Empty input -> 0.
uint64_t simhash(const std::vector<std::pair<std::string, uint32_t>>& features, uint64_t seed);

uint64_t fingerprint_instruction(std::string_view instruction, uint64_t seed);

inline int hamming(uint64_t a, uint64_t b) { return __builtin_popcountll(a ^ b); }

// Block-partition index: the 64 bits split into `blocks` contiguous blocks;
// with blocks >= k+1 any pair within distance k shares at least one exact
// block, so bucket retrieval is complete.
class SimhashIndex {
  public:
    explicit SimhashIndex(const DedupConfig& cfg);

    struct InsertResult {
        bool unique = true;
        std::string duplicate_of; // set when !unique
        int distance = 0;
    };

    // Returns duplicate_of the first previously inserted fingerprint within
    // Hamming distance <= k, else inserts and reports unique.
    InsertResult insert(const Fingerprint& fp);

    size_t size() const { return ids_.size(); }

  private:
    uint64_t block_key(uint64_t bits, int block) const;

    DedupConfig cfg_;
    std::vector<uint64_t> bits_;
    std::vector<std::string> ids_;
    // per block: extracted bits -> entry indices in insertion order
    std::vector<std::unordered_map<uint64_t, std::vector<uint32_t>>> buckets_;
};

struct DropRecord {
    std::string sample_id;
    std::string duplicate_of;
    int distance = 0;

    json to_json() const;
};

// Streaming single-pass near-duplicate filter, first-seen-wins, stable order.
class Deduper {
  public:
    explicit Deduper(const DedupConfig& cfg) : cfg_(cfg), index_(cfg) { cfg.validate(); }

    // nullopt -> sample kept; otherwise the drop record.
    std::optional<DropRecord> feed(const Sample& s);

  private:
    DedupConfig cfg_;
    SimhashIndex index_;
};

struct DedupResult {
    std::vector<Sample> kept;
    std::vector<DropRecord> dropped;
};

DedupResult dedup_stream(const std::vector<Sample>& samples, const DedupConfig& cfg);

} // namespace alignforge
