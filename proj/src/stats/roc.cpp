#include "rubricforge/stats/roc.hpp"

#include "rubricforge/stats/quantile.hpp"
#include "rubricforge/util/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rubricforge::stats {

namespace {

void split_classes(std::span<const double> scores, std::span<const int> labels,
                   std::vector<double>& pos, std::vector<double>& neg) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auroc: scores and labels differ in length");
    pos.clear();
    neg.clear();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1) pos.push_back(scores[i]);
        else if (labels[i] == 0) neg.push_back(scores[i]);
        else throw std::invalid_argument("auroc: labels must be 0 or 1");
    }
    if (pos.empty() || neg.empty()) throw DegenerateError("auroc undefined: labels contain a single class");
}

// For each query value: (#reference < q) + 0.5 (#reference == q), divided by
// the reference count. `reference` must be sorted.
std::vector<double> beat_fraction(const std::vector<double>& queries, const std::vector<double>& reference) {
    std::vector<double> out(queries.size());
    const double denom = static_cast<double>(reference.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto lo = std::lower_bound(reference.begin(), reference.end(), queries[i]);
        const auto hi = std::upper_bound(lo, reference.end(), queries[i]);
        const double less = static_cast<double>(lo - reference.begin());
        const double equal = static_cast<double>(hi - lo);
        out[i] = (less + 0.5 * equal) / denom;
    }
    return out;
}

double sample_cov(const std::vector<double>& a, const std::vector<double>& b, double ma, double mb) {
    if (a.size() < 2) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

} // namespace

Placements placement_values(std::span<const double> scores, std::span<const int> labels) {
    std::vector<double> pos, neg;
    split_classes(scores, labels, pos, neg);
    std::vector<double> neg_sorted = neg;
    std::sort(neg_sorted.begin(), neg_sorted.end());
    Placements p;
    p.positive = beat_fraction(pos, neg_sorted);
    // A negative's placement is the share of positives that beat it.
    std::vector<double> pos_sorted = pos;
    std::sort(pos_sorted.begin(), pos_sorted.end());
    const double m = static_cast<double>(pos.size());
    p.negative.resize(neg.size());
    for (std::size_t j = 0; j < neg.size(); ++j) {
        const auto lo = std::lower_bound(pos_sorted.begin(), pos_sorted.end(), neg[j]);
        const auto hi = std::upper_bound(lo, pos_sorted.end(), neg[j]);
        const double greater = static_cast<double>(pos_sorted.end() - hi);
        const double equal = static_cast<double>(hi - lo);
        p.negative[j] = (greater + 0.5 * equal) / m;
    }
    double sum = 0.0;
    for (double v : p.positive) sum += v;
    p.auroc = sum / m;
    return p;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
    return placement_values(scores, labels).auroc;
}

Eigen::MatrixXd delong_covariance(const std::vector<std::vector<double>>& score_sets,
                                  std::span<const int> labels, Eigen::VectorXd* aurocs) {
    const auto k = score_sets.size();
    if (k == 0) throw std::invalid_argument("delong_covariance: no score sets");
    std::vector<Placements> pl;
    pl.reserve(k);
    for (const auto& s : score_sets) pl.push_back(placement_values(s, labels));
    const double m = static_cast<double>(pl[0].positive.size());
    const double n = static_cast<double>(pl[0].negative.size());
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    std::vector<double> mean_pos(k), mean_neg(k);
    for (std::size_t r = 0; r < k; ++r) {
        double sp = 0.0, sn = 0.0;
        for (double v : pl[r].positive) sp += v;
        for (double v : pl[r].negative) sn += v;
        mean_pos[r] = sp / m;
        mean_neg[r] = sn / n;
    }
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t s = r; s < k; ++s) {
            const double s10 = sample_cov(pl[r].positive, pl[s].positive, mean_pos[r], mean_pos[s]);
            const double s01 = sample_cov(pl[r].negative, pl[s].negative, mean_neg[r], mean_neg[s]);
            const double c = s10 / m + s01 / n;
            cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = c;
            cov(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r)) = c;
        }
    }
    if (aurocs) {
        aurocs->resize(static_cast<Eigen::Index>(k));
        for (std::size_t r = 0; r < k; ++r) (*aurocs)(static_cast<Eigen::Index>(r)) = pl[r].auroc;
    }
    return cov;
}

AurocEstimate delong_ci(std::span<const double> scores, std::span<const int> labels, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("delong_ci: level must be in (0,1)");
    std::vector<std::vector<double>> sets{std::vector<double>(scores.begin(), scores.end())};
    Eigen::VectorXd a;
    const Eigen::MatrixXd cov = delong_covariance(sets, labels, &a);
    AurocEstimate est;
    est.auroc = a(0);
    est.variance = cov(0, 0);
    for (int y : labels) (y == 1 ? est.n_pos : est.n_neg)++;
    if (est.n_pos < 2 || est.n_neg < 2) {
        throw std::invalid_argument("delong_ci: need at least 2 positives and 2 negatives");
    }
    if (est.auroc <= 0.0 || est.auroc >= 1.0) {
        est.ci_low = est.ci_high = est.auroc;
        est.warning = "AUROC on the boundary; DeLong variance is zero and the CI is degenerate";
        return est;
    }
    const double z = normal_quantile(0.5 + level / 2.0);
    const double half = z * std::sqrt(std::max(est.variance, 0.0));
    est.ci_low = std::clamp(est.auroc - half, 0.0, 1.0);
    est.ci_high = std::clamp(est.auroc + half, 0.0, 1.0);
    return est;
}

DeltaAuroc delong_paired(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels, double level) {
    if (scores_a.size() != scores_b.size()) throw std::invalid_argument("delong_paired: score vectors differ in length");
    std::vector<std::vector<double>> sets{std::vector<double>(scores_a.begin(), scores_a.end()),
                                          std::vector<double>(scores_b.begin(), scores_b.end())};
    Eigen::VectorXd a;
    const Eigen::MatrixXd cov = delong_covariance(sets, labels, &a);
    DeltaAuroc d;
    d.auroc_a = a(0);
    d.auroc_b = a(1);
    d.delta = a(0) - a(1);
    d.variance = std::max(0.0, cov(0, 0) + cov(1, 1) - 2.0 * cov(0, 1));
    const double z = normal_quantile(0.5 + level / 2.0);
    if (d.variance <= 0.0) {
        d.ci_low = d.ci_high = d.delta;
        d.p_value = d.delta == 0.0 ? 1.0 : 0.0;
    } else {
        const double se = std::sqrt(d.variance);
        d.ci_low = d.delta - z * se;
        d.ci_high = d.delta + z * se;
        d.p_value = two_sided_p(d.delta / se);
    }
    d.significant = d.ci_low > 0.0 || d.ci_high < 0.0;
    return d;
}

} // namespace rubricforge::stats
