#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mrd::rng {

inline uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 engine(uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

/// Engine for simulation number `k` of a seeded batch. Streams depend only
/// on (seed, k), so simulations can run in any order with identical results.
inline std::mt19937_64 substream(uint64_t seed, uint64_t k) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(k ^ 0xD1B54A32D192ED03ull)));
}

/// Fills `m` doubles with standard normals, consuming the engine in order.
inline void fill_standard_normal(std::mt19937_64& gen, double* out, std::size_t m) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < m; ++i) out[i] = normal(gen);
}

}  // namespace mrd::rng
