#pragma once

// Deterministic, platform-stable random number generation.
//
// All sampling in the library goes through Rng: a 64-bit Mersenne Twister
// (std::mt19937_64, whose output sequence is fixed by the standard) with
// hand-written distributions, because the std:: distribution objects are
// implementation-defined. Independent streams are derived from a user seed
// and a stream tag with SplitMix64 so that, for example, discovery agent 3
// always sees the same subset regardless of how many agents run.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace rubricforge {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stream seed for (seed, tag, index); stable across runs and platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0)
        : engine_(derive_seed(seed, tag, index)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [lo, hi], unbiased (rejection sampling).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    // Standard normal via the Marsaglia polar method.
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Poisson draw by sequential inversion; fine for the small means used here.
    std::int64_t poisson(double mean);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n) in sampled order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rubricforge
