#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rubricforge::stats {

struct ForestParams {
    int n_estimators = 200;
    int max_features = 10;
    int max_depth = 20;
    int min_samples_leaf = 5;
    // Reweight classes so each carries half of the total sample weight.
    bool balanced_class_weight = true;
    bool bootstrap = true;
    // Worker threads for tree construction; 0 means hardware concurrency.
    std::size_t threads = 0;

    std::string describe() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // weighted positive fraction at the node
};

class DecisionTree {
public:
    std::vector<TreeNode> nodes;
    int depth = 0;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    ForestParams params;
    int effective_max_features = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    // Mean over trees of the leaf positive fraction.
    std::vector<double> predict_proba(const Eigen::MatrixXd& features) const;
};

// Bagged CART classifier with weighted Gini splits over a uniformly sampled
// feature subset at each node. Deterministic for a given seed regardless of
// thread count: tree t draws from its own derived stream.
ForestModel fit_random_forest(const Eigen::MatrixXd& features, std::span<const int> labels,
                              const ForestParams& params, std::uint64_t seed);

} // namespace rubricforge::stats
