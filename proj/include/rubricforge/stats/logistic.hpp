#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rubricforge::stats {

enum class ClassWeighting { None, RareEvent };

struct LogisticOptions {
    ClassWeighting weighting = ClassWeighting::None;
    // Population prevalence for prior-corrected (King-Zeng) weights:
    // w1 = tau / ybar, w0 = (1 - tau) / (1 - ybar). 0.5 gives balanced classes.
    double target_prevalence = 0.5;
    int max_iterations = 100;
    double gradient_tolerance = 1e-6;
    // |linear predictor| beyond which the fit is treated as separated.
    double separation_margin = 30.0;
};

struct LogisticModel {
    double intercept = 0.0;
    Eigen::VectorXd weights;
    // Standard errors for (intercept, weights...), from the inverse weighted
    // information matrix.
    Eigen::VectorXd std_errors;
    ClassWeighting weighting = ClassWeighting::None;
    double positive_weight = 1.0;
    double negative_weight = 1.0;
    int iterations = 0;
    double gradient_norm = 0.0;
    double log_likelihood = 0.0;
    bool converged = false;
    bool separation = false;
    std::vector<std::string> warnings;

    double decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    std::vector<double> predict_proba(const Eigen::MatrixXd& features) const;
};

// Weighted maximum-likelihood logistic regression by damped Newton-Raphson
// (IRLS). An intercept is always fitted; `features` must not contain one.
// Perfect or quasi-complete separation stops the iteration early and is
// reported through `separation` and `converged == false`.
LogisticModel fit_logistic(const Eigen::MatrixXd& features, std::span<const int> labels,
                           const LogisticOptions& options = {});

} // namespace rubricforge::stats
