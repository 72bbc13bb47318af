#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace nwp {

// FNV-1a 64-bit hash. Used for seed derivation tags and artifact content hashes.
std::uint64_t fnv1a64(std::string_view bytes);

// One splitmix64 round; decorrelates seeds derived from the same base.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from (base seed, purpose tag).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard, and all distributions below are implemented here rather than
// with std::*_distribution (whose algorithms are implementation-defined),
// so identical seeds replay identically across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Box-Muller. Consumes exactly two uniforms per call.
    double normal(double mean, double sd);

    // Uniform integer in [0, n); rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t n);

    // Fisher-Yates over indices 0..n-1.
    std::vector<std::size_t> shuffled_indices(std::size_t n);

private:
    std::mt19937_64 gen_;
};

}  // namespace nwp
