#pragma once

#include <span>
#include <vector>

namespace rubricforge::stats {

// 1-based ranks with ties assigned the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson product-moment correlation. Throws DegenerateError when either
// input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Spearman's rho: Pearson correlation of the average-rank transforms.
// Requires equal lengths >= 3.
double spearman_rho(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> x);

} // namespace rubricforge::stats
