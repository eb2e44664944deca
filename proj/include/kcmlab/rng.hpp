#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kcmlab {

// SplitMix64: used only to derive independent engine seeds from
// (base seed, stream index), so per-trial streams are reproducible and
// independent of scheduling.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL * (stream + 1));
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    return std::mt19937_64(seq);
}

// Uniform in [0,1) with 53-bit resolution; fixed construction so outputs are
// identical across standard library implementations.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Exponential with the given rate; -log1p(-u) maps u in [0,1) to [0,inf).
inline double sample_exponential(std::mt19937_64& g, double rate) {
    return -std::log1p(-uniform01(g)) / rate;
}

inline bool sample_bernoulli(std::mt19937_64& g, double p) {
    return uniform01(g) < p;
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
    std::uint64_t threshold = -n % n;  // rejection bound for unbiased draw
    for (;;) {
        std::uint64_t r = g();
        if (r >= threshold) return r % n;
    }
}

}  // namespace kcmlab
