#pragma once
// Stable hashing utilities. std::hash is not guaranteed stable across
// platforms or runs, so everything that feeds seeds or digests goes
// through these instead.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace silicon {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// Joins parts with a unit separator so ("ab","c") and ("a","bc") differ.
inline std::uint64_t stable_hash(std::initializer_list<std::string_view> parts) {
    std::uint64_t h = kFnvOffset;
    for (auto part : parts) {
        h = fnv1a64(part, h);
        h ^= 0x1f;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::string hex_digest(std::uint64_t h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace silicon
