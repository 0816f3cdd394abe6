#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace alignforge {

// MurmurHash64A (Austin Appleby, public domain). Seedable 64-bit hash over
// raw bytes; used for simhash token hashing, seed derivation and bucketing.
inline uint64_t murmur64(const void* key, size_t len, uint64_t seed) {
    const uint64_t m = 0xc6a4a7935bd1e995ULL;
    const int r = 47;

    uint64_t h = seed ^ (len * m);

    const auto* data = static_cast<const unsigned char*>(key);
    const unsigned char* end = data + (len / 8) * 8;

    while (data != end) {
        uint64_t k;
        std::memcpy(&k, data, 8);
        data += 8;

        k *= m;
        k ^= k >> r;
        k *= m;

        h ^= k;
        h *= m;
    }

    size_t tail = len & 7;
    if (tail > 0) {
        uint64_t k = 0;
        std::memcpy(&k, data, tail);
        h ^= k;
        h *= m;
    }

    h ^= h >> r;
    h *= m;
    h ^= h >> r;

    return h;
}

inline uint64_t murmur64(std::string_view s, uint64_t seed) {
    return murmur64(s.data(), s.size(), seed);
}

namespace detail {

inline uint64_t rotl64(uint64_t x, int8_t r) { return (x << r) | (x >> (64 - r)); }

inline uint64_t fmix64(uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

} // namespace detail

// MurmurHash3 x64 128-bit (Austin Appleby, public domain). Used for
// content-derived ids, cache keys and file hashes.
inline std::array<uint64_t, 2> murmur128(const void* key, size_t len, uint64_t seed) {
    const auto* data = static_cast<const unsigned char*>(key);
    const size_t nblocks = len / 16;

    uint64_t h1 = seed;
    uint64_t h2 = seed;

    const uint64_t c1 = 0x87c37b91114253d5ULL;
    const uint64_t c2 = 0x4cf5ad432745937fULL;

    for (size_t i = 0; i < nblocks; i++) {
        uint64_t k1, k2;
        std::memcpy(&k1, data + i * 16, 8);
        std::memcpy(&k2, data + i * 16 + 8, 8);

        k1 *= c1; k1 = detail::rotl64(k1, 31); k1 *= c2; h1 ^= k1;
        h1 = detail::rotl64(h1, 27); h1 += h2; h1 = h1 * 5 + 0x52dce729;
        k2 *= c2; k2 = detail::rotl64(k2, 33); k2 *= c1; h2 ^= k2;
        h2 = detail::rotl64(h2, 31); h2 += h1; h2 = h2 * 5 + 0x38495ab5;
    }

    const unsigned char* tail = data + nblocks * 16;
    uint64_t k1 = 0;
    uint64_t k2 = 0;

    switch (len & 15) {
        case 15: k2 ^= uint64_t(tail[14]) << 48; [[fallthrough]];
        case 14: k2 ^= uint64_t(tail[13]) << 40; [[fallthrough]];
        case 13: k2 ^= uint64_t(tail[12]) << 32; [[fallthrough]];
        case 12: k2 ^= uint64_t(tail[11]) << 24; [[fallthrough]];
        case 11: k2 ^= uint64_t(tail[10]) << 16; [[fallthrough]];
        case 10: k2 ^= uint64_t(tail[9]) << 8; [[fallthrough]];
        case 9:  k2 ^= uint64_t(tail[8]);
                 k2 *= c2; k2 = detail::rotl64(k2, 33); k2 *= c1; h2 ^= k2;
                 [[fallthrough]];
        case 8:  k1 ^= uint64_t(tail[7]) << 56; [[fallthrough]];
        case 7:  k1 ^= uint64_t(tail[6]) << 48; [[fallthrough]];
        case 6:  k1 ^= uint64_t(tail[5]) << 40; [[fallthrough]];
        case 5:  k1 ^= uint64_t(tail[4]) << 32; [[fallthrough]];
        case 4:  k1 ^= uint64_t(tail[3]) << 24; [[fallthrough]];
        case 3:  k1 ^= uint64_t(tail[2]) << 16; [[fallthrough]];
        case 2:  k1 ^= uint64_t(tail[1]) << 8; [[fallthrough]];
        case 1:  k1 ^= uint64_t(tail[0]);
                 k1 *= c1; k1 = detail::rotl64(k1, 31); k1 *= c2; h1 ^= k1;
    }

    h1 ^= len;
    h2 ^= len;
    h1 += h2;
    h2 += h1;
    h1 = detail::fmix64(h1);
    h2 = detail::fmix64(h2);
    h1 += h2;
    h2 += h1;

    return {h1, h2};
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; i--) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// 32 hex chars of the 128-bit hash.
inline std::string hash128_hex(std::string_view s, uint64_t seed = 0) {
    auto h = murmur128(s.data(), s.size(), seed);
    return to_hex(h[0]) + to_hex(h[1]);
}

} // namespace alignforge
