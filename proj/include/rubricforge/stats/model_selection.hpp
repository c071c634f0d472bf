#pragma once

#include "rubricforge/stats/forest.hpp"
#include "rubricforge/stats/logistic.hpp"
#include "rubricforge/stats/roc.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rubricforge::stats {

enum class ModelKind { Logistic, RandomForest };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Hyperparameter grid for the random forest. Logistic models have a single
// cell (the configured weighting).
struct ForestGrid {
    std::vector<int> n_estimators{200, 300, 400, 500, 1000};
    std::vector<int> max_features{10, 25, 50};
    std::vector<int> max_depth{20, 50};
    std::vector<int> min_samples_leaf{5, 20};

    // Cartesian product after clamping max_features to the feature count;
    // cells that become identical through clamping are listed once.
    std::vector<ForestParams> cells(int n_features) const;
};

struct ModelSpec {
    ModelKind kind = ModelKind::RandomForest;
    ForestParams forest;
    LogisticOptions logistic{ClassWeighting::RareEvent};

    std::string describe() const;
};

// Fit on the training rows and return predicted scores for the test rows.
std::vector<double> fit_predict(const ModelSpec& spec, const Eigen::MatrixXd& X_train,
                                std::span<const int> y_train, const Eigen::MatrixXd& X_test, std::uint64_t seed);

struct NestedCvOptions {
    int outer_k = 5;
    int inner_k = 5;
    ModelKind kind = ModelKind::RandomForest;
    ForestGrid grid;
    LogisticOptions logistic{ClassWeighting::RareEvent};
    bool balanced_class_weight = true;
    std::size_t threads = 0;
    std::uint64_t seed = 0;
};

struct FoldReport {
    int fold = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_test_pos = 0;
    double inner_auroc = 0.0;  // mean inner-validation AUROC of the chosen cell
    double test_auroc = 0.0;
    std::string chosen;
};

struct NestedCvResult {
    AurocEstimate pooled;
    std::vector<double> predictions;  // out-of-fold score per instance
    std::vector<FoldReport> folds;
};

// Outer stratified k-fold; within each outer-training set an inner stratified
// k-fold grid search picks the cell with the best mean validation AUROC
// (first cell wins ties), which is refit on the outer-training set and scored
// on the outer-test fold. Pooled held-out predictions get a DeLong CI.
NestedCvResult nested_cv_auroc(const Eigen::MatrixXd& features, std::span<const int> labels,
                               const NestedCvOptions& options);

struct HoldoutSummary {
    std::vector<double> aurocs;
    double mean = 0.0;
    double sd = 0.0;
};

// Repeated stratified train/test splits, one per seed (mean +- sd AUROC).
HoldoutSummary repeated_holdout_auroc(const Eigen::MatrixXd& features, std::span<const int> labels,
                                      const ModelSpec& spec, std::span<const std::uint64_t> seeds,
                                      double test_fraction = 0.2);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows);
std::vector<int> select(std::span<const int> v, std::span<const std::size_t> rows);

} // namespace rubricforge::stats
