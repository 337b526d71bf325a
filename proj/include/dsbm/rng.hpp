#pragma once
// Seeding helpers: splitmix64 mixing for derived substreams, so each
// (seed, stream ids...) pair owns an independent deterministic generator.

#include <cstdint>
#include <random>
#include <vector>

namespace dsbm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives a substream seed by folding ids into the base seed one at a time.
template <typename... Ids>
std::uint64_t substream_seed(std::uint64_t seed, Ids... ids) {
    std::uint64_t s = splitmix64(seed);
    ((s = splitmix64(s ^ static_cast<std::uint64_t>(ids))), ...);
    return s;
}

template <typename... Ids>
std::mt19937_64 substream(std::uint64_t seed, Ids... ids) {
    return std::mt19937_64(substream_seed(seed, ids...));
}

// Draws from a discrete distribution given its cumulative weights
// (cumulative.back() == 1 within rounding).
inline int draw_categorical(const std::vector<double>& cumulative, std::mt19937_64& rng) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    int k = static_cast<int>(cumulative.size());
    for (int r = 0; r < k - 1; ++r)
        if (u < cumulative[r]) return r;
    return k - 1;
}

inline std::vector<double> cumulative_weights(const std::vector<double>& weights) {
    std::vector<double> cum(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cum[i] = acc;
    }
    return cum;
}

}  // namespace dsbm
