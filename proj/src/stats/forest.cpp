#include "rubricforge/stats/forest.hpp"

#include "rubricforge/util/parallel.hpp"
#include "rubricforge/util/rng.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rubricforge::stats {

std::string ForestParams::describe() const {
    std::ostringstream os;
    os << "n_estimators=" << n_estimators << " max_features=" << max_features << " max_depth=" << max_depth
       << " min_samples_leaf=" << min_samples_leaf;
    return os.str();
}

double DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const auto& node = nodes[static_cast<std::size_t>(idx)];
        idx = x(node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(idx)].value;
}

std::vector<double> ForestModel::predict_proba(const Eigen::MatrixXd& features) const {
    std::vector<double> out(static_cast<std::size_t>(features.rows()), 0.0);
    if (trees.empty()) return out;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const Eigen::RowVectorXd row = features.row(i);
        double s = 0.0;
        for (const auto& t : trees) s += t.predict(row);
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(trees.size());
    }
    return out;
}

namespace {

struct Sample {
    std::size_t row;
    double weight;
    double positive;  // weight if label is 1, else 0
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // weighted child impurity, lower is better
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const ForestParams& params, int max_features, Rng& rng)
        : X_(X), params_(params), max_features_(max_features), rng_(rng) {}

    DecisionTree build(std::vector<Sample> samples) {
        samples_ = std::move(samples);
        tree_ = DecisionTree{};
        grow(0, samples_.size(), 0);
        return std::move(tree_);
    }

private:
    static double gini_mass(double w, double pos) {
        // w * 2q(1-q) with q = pos / w
        return w > 0.0 ? 2.0 * pos * (w - pos) / w : 0.0;
    }

    int grow(std::size_t begin, std::size_t end, int depth) {
        double w = 0.0, pos = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            w += samples_[i].weight;
            pos += samples_[i].positive;
        }
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back(TreeNode{});
        tree_.nodes.back().value = w > 0.0 ? pos / w : 0.0;
        tree_.depth = std::max(tree_.depth, depth);

        const std::size_t count = end - begin;
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
        const bool pure = pos <= 0.0 || pos >= w;
        if (depth >= params_.max_depth || count < 2 * min_leaf || pure) return id;

        const SplitCandidate best = find_split(begin, end, w, pos, min_leaf);
        if (best.feature < 0) return id;

        auto mid_it = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                     samples_.begin() + static_cast<std::ptrdiff_t>(end), [&](const Sample& s) {
                                         return X_(static_cast<Eigen::Index>(s.row), best.feature) <= best.threshold;
                                     });
        const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
        const int left = grow(begin, mid, depth + 1);
        const int right = grow(mid, end, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    SplitCandidate find_split(std::size_t begin, std::size_t end, double w, double pos, std::size_t min_leaf) {
        const int p = static_cast<int>(X_.cols());
        std::vector<std::size_t> features;
        if (max_features_ >= p) {
            features.resize(static_cast<std::size_t>(p));
            std::iota(features.begin(), features.end(), std::size_t{0});
        } else {
            features = rng_.sample_without_replacement(static_cast<std::size_t>(p),
                                                       static_cast<std::size_t>(max_features_));
        }
        SplitCandidate best;
        best.score = gini_mass(w, pos) - 1e-12;
        const std::size_t count = end - begin;
        scratch_.resize(count);
        for (std::size_t f : features) {
            const auto col = static_cast<Eigen::Index>(f);
            for (std::size_t i = 0; i < count; ++i) {
                const auto& s = samples_[begin + i];
                scratch_[i] = {X_(static_cast<Eigen::Index>(s.row), col), s.weight, s.positive};
            }
            std::sort(scratch_.begin(), scratch_.end(),
                      [](const Entry& a, const Entry& b) { return a.value < b.value; });
            if (scratch_.front().value == scratch_.back().value) continue;
            double wl = 0.0, pl = 0.0;
            for (std::size_t i = 0; i + 1 < count; ++i) {
                wl += scratch_[i].weight;
                pl += scratch_[i].positive;
                if (scratch_[i].value == scratch_[i + 1].value) continue;
                const std::size_t nl = i + 1;
                if (nl < min_leaf) continue;
                if (count - nl < min_leaf) break;
                const double score = gini_mass(wl, pl) + gini_mass(w - wl, pos - pl);
                if (score < best.score) {
                    best.score = score;
                    best.feature = static_cast<int>(f);
                    best.threshold = 0.5 * (scratch_[i].value + scratch_[i + 1].value);
                }
            }
        }
        return best;
    }

    struct Entry {
        double value;
        double weight;
        double positive;
    };

    const Eigen::MatrixXd& X_;
    const ForestParams& params_;
    int max_features_;
    Rng& rng_;
    std::vector<Sample> samples_;
    std::vector<Entry> scratch_;
    DecisionTree tree_;
};

} // namespace

ForestModel fit_random_forest(const Eigen::MatrixXd& features, std::span<const int> labels,
                              const ForestParams& params, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (n != labels.size()) throw std::invalid_argument("fit_random_forest: row/label mismatch");
    if (n == 0 || features.cols() == 0) throw std::invalid_argument("fit_random_forest: empty feature matrix");
    if (params.n_estimators < 1 || params.max_features < 1 || params.max_depth < 0 || params.min_samples_leaf < 1)
        throw std::invalid_argument("fit_random_forest: invalid hyperparameters");

    ForestModel model;
    model.params = params;
    model.seed = seed;
    const int p = static_cast<int>(features.cols());
    model.effective_max_features = params.max_features;
    if (params.max_features > p) {
        model.effective_max_features = p;
        model.warnings.push_back("max_features=" + std::to_string(params.max_features) + " exceeds " +
                                 std::to_string(p) + " features; clamped");
    }

    double n_pos = 0.0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("fit_random_forest: labels must be 0 or 1");
        n_pos += y;
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    double w_pos = 1.0, w_neg = 1.0;
    if (params.balanced_class_weight && n_pos > 0.0 && n_neg > 0.0) {
        w_pos = static_cast<double>(n) / (2.0 * n_pos);
        w_neg = static_cast<double>(n) / (2.0 * n_neg);
    }

    model.trees.resize(static_cast<std::size_t>(params.n_estimators));
    const std::size_t workers = params.threads == 0 ? hardware_workers() : params.threads;
    parallel_for(model.trees.size(), workers, [&](std::size_t t) {
        Rng rng(seed, "forest-tree", t);
        std::vector<unsigned> counts(n, params.bootstrap ? 0u : 1u);
        if (params.bootstrap) {
            for (std::size_t d = 0; d < n; ++d)
                ++counts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n - 1)))];
        }
        std::vector<Sample> samples;
        samples.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[i] == 0) continue;
            const double cw = labels[i] == 1 ? w_pos : w_neg;
            const double weight = cw * counts[i];
            samples.push_back({i, weight, labels[i] == 1 ? weight : 0.0});
        }
        TreeBuilder builder(features, params, model.effective_max_features, rng);
        model.trees[t] = builder.build(std::move(samples));
    });
    return model;
}

} // namespace rubricforge::stats
