#include "rubricforge/stats/kappa.hpp"

#include "rubricforge/stats/quantile.hpp"
#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace rubricforge::stats {

namespace {

void validate(std::span<const int> r1, std::span<const int> r2, int levels) {
    if (r1.size() != r2.size()) throw std::invalid_argument("weighted_kappa: rater vectors differ in length");
    if (r1.size() < 2) throw std::invalid_argument("weighted_kappa: need at least 2 items");
    if (levels < 2) throw std::invalid_argument("weighted_kappa: need at least 2 levels");
    for (std::size_t i = 0; i < r1.size(); ++i) {
        if (r1[i] < 1 || r1[i] > levels || r2[i] < 1 || r2[i] > levels) {
            throw std::invalid_argument("weighted_kappa: rating out of range at item " + std::to_string(i));
        }
    }
}

// Works from integer counts so resamples can reuse it without re-validating.
// Returns false when the expected disagreement is zero.
bool kappa_from_counts(const std::vector<double>& joint, const std::vector<double>& row,
                       const std::vector<double>& col, int levels, double n, double& out) {
    double observed = 0.0;
    double expected = 0.0;
    for (int i = 0; i < levels; ++i) {
        for (int j = 0; j < levels; ++j) {
            const double d = static_cast<double>((i - j) * (i - j));
            if (d == 0.0) continue;
            observed += d * joint[static_cast<std::size_t>(i * levels + j)];
            expected += d * row[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(j)] / n;
        }
    }
    if (expected <= 0.0) return false;
    out = 1.0 - observed / expected;
    return true;
}

} // namespace

double weighted_kappa(std::span<const int> r1, std::span<const int> r2, int levels) {
    validate(r1, r2, levels);
    const auto L = static_cast<std::size_t>(levels);
    std::vector<double> joint(L * L, 0.0), row(L, 0.0), col(L, 0.0);
    for (std::size_t t = 0; t < r1.size(); ++t) {
        const auto i = static_cast<std::size_t>(r1[t] - 1);
        const auto j = static_cast<std::size_t>(r2[t] - 1);
        joint[i * L + j] += 1.0;
        row[i] += 1.0;
        col[j] += 1.0;
    }
    double k = 0.0;
    if (!kappa_from_counts(joint, row, col, levels, static_cast<double>(r1.size()), k)) {
        throw DegenerateError("weighted kappa undefined: expected disagreement is zero (a rater uses one category)");
    }
    return k;
}

KappaEstimate bootstrap_kappa_ci(std::span<const int> r1, std::span<const int> r2, int levels,
                                 std::size_t replicates, std::uint64_t seed, double level) {
    if (replicates == 0) throw std::invalid_argument("bootstrap_kappa_ci: replicates must be positive");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_kappa_ci: level must be in (0,1)");
    KappaEstimate est;
    est.kappa = weighted_kappa(r1, r2, levels);
    est.n_items = r1.size();
    est.replicates = replicates;

    const auto L = static_cast<std::size_t>(levels);
    const std::size_t n = r1.size();
    Rng rng(seed, "kappa-bootstrap");
    std::vector<double> kappas;
    kappas.reserve(replicates);
    std::vector<double> joint(L * L), row(L), col(L);
    while (kappas.size() < replicates) {
        // Undefined draws outnumbering the defined ones means > 50% failed.
        if (est.redrawn > replicates) {
            throw DegenerateError("bootstrap_kappa_ci: more than 50% of resamples had undefined kappa");
        }
        std::fill(joint.begin(), joint.end(), 0.0);
        std::fill(row.begin(), row.end(), 0.0);
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const auto s = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n - 1)));
            const auto i = static_cast<std::size_t>(r1[s] - 1);
            const auto j = static_cast<std::size_t>(r2[s] - 1);
            joint[i * L + j] += 1.0;
            row[i] += 1.0;
            col[j] += 1.0;
        }
        double k = 0.0;
        if (kappa_from_counts(joint, row, col, levels, static_cast<double>(n), k)) {
            kappas.push_back(k);
        } else {
            ++est.redrawn;
        }
    }
    std::sort(kappas.begin(), kappas.end());
    const double alpha = 1.0 - level;
    est.ci_low = sorted_quantile(kappas, alpha / 2.0);
    est.ci_high = sorted_quantile(kappas, 1.0 - alpha / 2.0);
    est.ci_low = std::min(est.ci_low, est.kappa);
    est.ci_high = std::max(est.ci_high, est.kappa);
    return est;
}

} // namespace rubricforge::stats
