#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace rubricforge::stats {

struct GlmmOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
    // Treat the random-intercept sd as zero (plain Poisson GLM).
    bool fix_sigma_zero = false;
    // Center and scale covariates before fitting; coefficients are then
    // reported on the standardized scale.
    bool standardize = false;
    // Cluster-robust sandwich covariance over groups instead of the
    // model-based inverse observed information.
    bool robust_covariance = false;
    double initial_sigma = 0.5;
    // Fits whose sigma falls below this are refit as a plain GLM with sigma 0.
    double sigma_floor = 1e-3;
};

struct GlmmFit {
    Eigen::VectorXd beta;        // intercept first
    Eigen::MatrixXd covariance;  // of beta
    Eigen::VectorXd std_errors;
    double sigma = 0.0;
    double log_likelihood = 0.0;  // Laplace-approximated marginal
    bool converged = false;
    bool boundary = false;      // sigma hit zero and the GLM refit was used
    bool identifiable = true;   // false with a single group
    int iterations = 0;
    std::size_t n_groups = 0;
    std::size_t n_obs = 0;
    std::vector<double> loglik_trace;  // accepted outer iterations
    std::vector<std::string> warnings;
    // Column means/sds when standardize was requested (empty otherwise).
    std::vector<double> center;
    std::vector<double> scale;
};

// Poisson GLMM with log link and a Gaussian random intercept per group,
// fit by maximizing the Laplace approximation to the marginal likelihood.
// Outcomes must be nonnegative integers (binary 0/1 allowed). Features
// exclude the intercept column.
GlmmFit fit_poisson_glmm(std::span<const double> outcome, const Eigen::MatrixXd& features,
                         std::span<const std::string> groups, const GlmmOptions& options = {});

struct PoissonGlmFit {
    Eigen::VectorXd beta;  // intercept first
    Eigen::MatrixXd covariance;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Plain Poisson regression with log link by Newton-Raphson.
PoissonGlmFit fit_poisson_glm(std::span<const double> outcome, const Eigen::MatrixXd& features,
                              int max_iterations = 100, double tolerance = 1e-10);

struct RateRatioRow {
    std::string dimension;
    double beta = 0.0;
    double std_error = 0.0;
    double rate_ratio = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    double p_value = 1.0;
};

// exp(beta) with Wald bounds exp(beta +- z*se) for each non-intercept term.
std::vector<RateRatioRow> rate_ratio_table(const GlmmFit& fit, std::span<const std::string> dimension_names,
                                           double level = 0.95);

} // namespace rubricforge::stats
