#include "rubricforge/stats/logistic.hpp"

#include "rubricforge/util/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rubricforge::stats {

namespace {

double log1p_exp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

double LogisticModel::decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return intercept + x.dot(weights);
}

std::vector<double> LogisticModel::predict_proba(const Eigen::MatrixXd& features) const {
    if (features.cols() != weights.size()) throw std::invalid_argument("predict_proba: feature count mismatch");
    const Eigen::VectorXd eta = (features * weights).array() + intercept;
    std::vector<double> out(static_cast<std::size_t>(eta.size()));
    for (Eigen::Index i = 0; i < eta.size(); ++i) out[static_cast<std::size_t>(i)] = sigmoid(eta(i));
    return out;
}

LogisticModel fit_logistic(const Eigen::MatrixXd& features, std::span<const int> labels,
                           const LogisticOptions& options) {
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols();
    if (static_cast<std::size_t>(n) != labels.size()) throw std::invalid_argument("fit_logistic: row/label mismatch");
    if (n <= p + 1) throw std::invalid_argument("fit_logistic: need more observations than parameters");

    double n_pos = 0.0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("fit_logistic: labels must be 0 or 1");
        n_pos += y;
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) throw DegenerateError("fit_logistic: labels contain a single class");

    LogisticModel model;
    model.weighting = options.weighting;
    if (options.weighting == ClassWeighting::RareEvent) {
        const double tau = options.target_prevalence;
        if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("fit_logistic: target prevalence must be in (0,1)");
        const double ybar = n_pos / static_cast<double>(n);
        model.positive_weight = tau / ybar;
        model.negative_weight = (1.0 - tau) / (1.0 - ybar);
    }

    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    X.rightCols(p) = features;
    Eigen::VectorXd y(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = labels[static_cast<std::size_t>(i)];
        w(i) = y(i) == 1.0 ? model.positive_weight : model.negative_weight;
    }

    auto loglik = [&](const Eigen::VectorXd& beta) {
        const Eigen::VectorXd eta = X * beta;
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) ll += w(i) * (y(i) * eta(i) - log1p_exp(eta(i)));
        return ll;
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    double ll = loglik(beta);
    Eigen::MatrixXd info(p + 1, p + 1);
    Eigen::VectorXd grad(p + 1);

    auto evaluate = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = X * b;
        Eigen::VectorXd resid(n), curv(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mu = sigmoid(eta(i));
            resid(i) = w(i) * (y(i) - mu);
            curv(i) = w(i) * mu * (1.0 - mu);
        }
        grad = X.transpose() * resid;
        info = X.transpose() * curv.asDiagonal() * X;
        return eta;
    };

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const Eigen::VectorXd eta = evaluate(beta);
        model.gradient_norm = grad.norm();
        model.iterations = iter;
        if (model.gradient_norm < options.gradient_tolerance) {
            model.converged = true;
            break;
        }
        double min_margin = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) min_margin = std::min(min_margin, (2.0 * y(i) - 1.0) * eta(i));
        if (eta.cwiseAbs().maxCoeff() > options.separation_margin) {
            model.separation = true;
            model.warnings.push_back(min_margin > 0.0
                                         ? "complete separation: coefficients diverge; iteration stopped"
                                         : "quasi-complete separation: coefficients diverge; iteration stopped");
            break;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        Eigen::VectorXd step;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            step = ldlt.solve(grad);
        }
        if (step.size() == 0 || !step.allFinite()) {
            const Eigen::MatrixXd ridge = info + 1e-8 * Eigen::MatrixXd::Identity(p + 1, p + 1);
            step = ridge.ldlt().solve(grad);
        }
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            const Eigen::VectorXd candidate = beta + t * step;
            const double cand_ll = loglik(candidate);
            if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12 * std::abs(ll)) {
                beta = candidate;
                ll = cand_ll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        model.iterations = iter + 1;
        if (!accepted) {
            model.warnings.push_back("line search failed to improve the likelihood");
            break;
        }
    }
    if (!model.converged && !model.separation && model.iterations >= options.max_iterations) {
        model.warnings.push_back("did not converge within the iteration limit");
    }
    evaluate(beta);
    model.gradient_norm = grad.norm();
    if (model.gradient_norm < options.gradient_tolerance && !model.separation) model.converged = true;

    model.intercept = beta(0);
    model.weights = beta.tail(p);
    model.log_likelihood = ll;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
        model.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
        model.std_errors = Eigen::VectorXd::Constant(p + 1, std::numeric_limits<double>::infinity());
    }
    return model;
}

} // namespace rubricforge::stats
