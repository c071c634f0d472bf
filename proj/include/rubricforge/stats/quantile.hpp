#pragma once

#include <span>

namespace rubricforge::stats {

// Linear-interpolation quantile (type 7) of an ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

// Standard normal quantile and upper-tail helpers (Boost.Math backed).
double normal_quantile(double p);
double normal_cdf(double z);
// Two-sided p-value for a standard normal statistic.
double two_sided_p(double z);

} // namespace rubricforge::stats
