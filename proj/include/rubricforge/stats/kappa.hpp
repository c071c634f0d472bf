#pragma once

#include <cstdint>
#include <span>

namespace rubricforge::stats {

struct KappaEstimate {
    double kappa = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_items = 0;
    // Bootstrap resamples whose kappa was undefined and had to be redrawn.
    std::size_t redrawn = 0;
    std::size_t replicates = 0;
    const char* weighting = "quadratic";
};

// Quadratically weighted Cohen's kappa for two raters on an ordinal 1..levels
// scale: 1 - sum(d*o) / sum(d*e) with d_ij = (i - j)^2. Throws
// DegenerateError when the expected disagreement is zero.
double weighted_kappa(std::span<const int> r1, std::span<const int> r2, int levels);

// Percentile item-bootstrap CI for weighted_kappa. The interval is widened,
// if needed, to contain the point estimate.
KappaEstimate bootstrap_kappa_ci(std::span<const int> r1, std::span<const int> r2, int levels,
                                 std::size_t replicates = 2000, std::uint64_t seed = 0,
                                 double level = 0.95);

} // namespace rubricforge::stats
