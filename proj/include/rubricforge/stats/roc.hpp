#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace rubricforge::stats {

struct AurocEstimate {
    double auroc = 0.5;
    double variance = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    // Set when the AUROC sits on {0, 1} and the CI collapses to a point.
    std::string warning;
};

struct DeltaAuroc {
    double auroc_a = 0.5;
    double auroc_b = 0.5;
    double delta = 0.0;
    double variance = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    bool significant = false;  // CI excludes zero
};

// Mann-Whitney AUROC with midrank tie handling:
// P(score+ > score-) + 0.5 P(score+ == score-).
double auroc(std::span<const double> scores, std::span<const int> labels);

// DeLong structural components for one score vector.
struct Placements {
    std::vector<double> positive;  // V10: per positive, share of negatives it beats
    std::vector<double> negative;  // V01: per negative, share of positives beating it
    double auroc = 0.5;
};

Placements placement_values(std::span<const double> scores, std::span<const int> labels);

// DeLong covariance matrix of the AUROCs of several score vectors sharing the
// same labels: S10/m + S01/n.
Eigen::MatrixXd delong_covariance(const std::vector<std::vector<double>>& score_sets,
                                  std::span<const int> labels, Eigen::VectorXd* aurocs = nullptr);

AurocEstimate delong_ci(std::span<const double> scores, std::span<const int> labels, double level = 0.95);

DeltaAuroc delong_paired(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels, double level = 0.95);

} // namespace rubricforge::stats
