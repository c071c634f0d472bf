#pragma once

// Brute-force reference implementations, written without the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace rubricforge::testing {

// Explicit rank table: rank_i = 1 + #{x_j < x_i} + (#{x_j == x_i} - 1) / 2.
inline std::vector<double> rank_table(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double less = 0, equal = 0;
        for (double v : x) {
            if (v < x[i]) ++less;
            if (v == x[i]) ++equal;
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

inline double pearson_sums(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson_sums(rank_table(x), rank_table(y));
}

// Confusion-matrix arithmetic with squared-distance weights.
inline double brute_weighted_kappa(const std::vector<int>& a, const std::vector<int>& b, int levels) {
    const auto L = static_cast<std::size_t>(levels);
    std::vector<std::vector<double>> obs(L, std::vector<double>(L, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) obs[static_cast<std::size_t>(a[i] - 1)][static_cast<std::size_t>(b[i] - 1)] += 1;
    const double n = static_cast<double>(a.size());
    std::vector<double> row(L, 0), col(L, 0);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            row[i] += obs[i][j];
            col[j] += obs[i][j];
        }
    double num = 0, den = 0;
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            const double w = (static_cast<double>(i) - static_cast<double>(j)) *
                             (static_cast<double>(i) - static_cast<double>(j));
            num += w * obs[i][j] / n;
            den += w * row[i] * col[j] / (n * n);
        }
    return 1.0 - num / den;
}

inline double pair_kernel(double pos, double neg) { return pos > neg ? 1.0 : (pos == neg ? 0.5 : 0.0); }

// All-pairs enumeration.
inline double brute_auroc(const std::vector<double>& s, const std::vector<int>& y) {
    double sum = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                sum += pair_kernel(s[i], s[j]);
                pairs += 1;
            }
    return sum / pairs;
}

struct BruteDelong {
    double auc_a = 0, auc_b = 0;
    double var_a = 0, var_b = 0, cov_ab = 0;
};

// DeLong components from explicit placement sums.
inline BruteDelong brute_delong(const std::vector<double>& a, const std::vector<double>& b, const std::vector<int>& y) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
    const double m = static_cast<double>(pos.size()), n = static_cast<double>(neg.size());
    auto v10 = [&](const std::vector<double>& s) {
        std::vector<double> v;
        for (auto i : pos) {
            double t = 0;
            for (auto j : neg) t += pair_kernel(s[i], s[j]);
            v.push_back(t / n);
        }
        return v;
    };
    auto v01 = [&](const std::vector<double>& s) {
        std::vector<double> v;
        for (auto j : neg) {
            double t = 0;
            for (auto i : pos) t += pair_kernel(s[i], s[j]);
            v.push_back(t / m);
        }
        return v;
    };
    auto mean = [](const std::vector<double>& v) {
        double t = 0;
        for (double x : v) t += x;
        return t / static_cast<double>(v.size());
    };
    auto cov = [&](const std::vector<double>& p, const std::vector<double>& q) {
        const double mp = mean(p), mq = mean(q);
        double t = 0;
        for (std::size_t i = 0; i < p.size(); ++i) t += (p[i] - mp) * (q[i] - mq);
        return t / static_cast<double>(p.size() - 1);
    };
    const auto a10 = v10(a), a01 = v01(a), b10 = v10(b), b01 = v01(b);
    BruteDelong out;
    out.auc_a = mean(a10);
    out.auc_b = mean(b10);
    out.var_a = cov(a10, a10) / m + cov(a01, a01) / n;
    out.var_b = cov(b10, b10) / m + cov(b01, b01) / n;
    out.cov_ab = cov(a10, b10) / m + cov(a01, b01) / n;
    return out;
}

// Poisson log-link regression by iteratively reweighted least squares on the
// working response z = eta + (y - mu) / mu.
inline Eigen::VectorXd irls_poisson(const std::vector<double>& y, const Eigen::MatrixXd& features, int iterations = 200) {
    const Eigen::Index n = features.rows(), p = features.cols() + 1;
    Eigen::MatrixXd X(n, p);
    X.col(0).setOnes();
    X.rightCols(p - 1) = features;
    double ybar = 0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(y.size());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta(0) = std::log(std::max(ybar, 1e-8));
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd eta = X * beta;
        Eigen::VectorXd w(n), z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mu = std::exp(eta(i));
            w(i) = mu;
            z(i) = eta(i) + (y[static_cast<std::size_t>(i)] - mu) / mu;
        }
        const Eigen::MatrixXd XtW = X.transpose() * w.asDiagonal();
        const Eigen::VectorXd next = (XtW * X).ldlt().solve(XtW * z);
        const double change = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (change < 1e-14) break;
    }
    return beta;
}

} // namespace rubricforge::testing
