// random.hpp - seeded substreams and portable sampling helpers.
//
// std::uniform_int_distribution and std::shuffle are implementation-defined;
// these helpers keep results identical across standard libraries.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace sitewatch {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for substream `index` of a named stage under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index = 0) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return splitmix64(splitmix64(master ^ h) + index);
}

/// Uniform integer in [0, n) by rejection sampling. n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r > limit);
    return r % n;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Fisher-Yates over any random-access container.
template <typename Container>
void shuffle(Container& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace sitewatch
