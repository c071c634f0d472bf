#include "rubricforge/stats/model_selection.hpp"

#include "rubricforge/stats/cv.hpp"
#include "rubricforge/stats/ranks.hpp"
#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <tuple>

namespace rubricforge::stats {

const char* to_string(ModelKind kind) {
    return kind == ModelKind::Logistic ? "logistic" : "random_forest";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "logistic") return ModelKind::Logistic;
    if (s == "random_forest" || s == "rf") return ModelKind::RandomForest;
    throw std::invalid_argument("unknown model kind: " + s);
}

std::vector<ForestParams> ForestGrid::cells(int n_features) const {
    std::vector<ForestParams> out;
    std::set<std::tuple<int, int, int, int>> seen;
    for (int ne : n_estimators)
        for (int mf : max_features)
            for (int md : max_depth)
                for (int ml : min_samples_leaf) {
                    ForestParams p;
                    p.n_estimators = ne;
                    p.max_features = std::min(mf, n_features);
                    p.max_depth = md;
                    p.min_samples_leaf = ml;
                    if (seen.insert({ne, p.max_features, md, ml}).second) out.push_back(p);
                }
    if (out.empty()) throw std::invalid_argument("forest grid is empty");
    return out;
}

std::string ModelSpec::describe() const {
    if (kind == ModelKind::Logistic) {
        return logistic.weighting == ClassWeighting::RareEvent ? "logistic weighting=rare_event"
                                                               : "logistic weighting=none";
    }
    return "random_forest " + forest.describe();
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

std::vector<int> select(std::span<const int> v, std::span<const std::size_t> rows) {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
    return out;
}

std::vector<double> fit_predict(const ModelSpec& spec, const Eigen::MatrixXd& X_train,
                                std::span<const int> y_train, const Eigen::MatrixXd& X_test, std::uint64_t seed) {
    if (spec.kind == ModelKind::Logistic) {
        const auto model = fit_logistic(X_train, y_train, spec.logistic);
        // Decision values rank identically to probabilities and do not saturate.
        std::vector<double> out(static_cast<std::size_t>(X_test.rows()));
        for (Eigen::Index i = 0; i < X_test.rows(); ++i) out[static_cast<std::size_t>(i)] = model.decision(X_test.row(i));
        return out;
    }
    const auto model = fit_random_forest(X_train, y_train, spec.forest, seed);
    return model.predict_proba(X_test);
}

namespace {

std::vector<ModelSpec> candidate_specs(const NestedCvOptions& options, int n_features) {
    std::vector<ModelSpec> specs;
    if (options.kind == ModelKind::Logistic) {
        ModelSpec s;
        s.kind = ModelKind::Logistic;
        s.logistic = options.logistic;
        specs.push_back(s);
        return specs;
    }
    for (auto cell : options.grid.cells(n_features)) {
        ModelSpec s;
        s.kind = ModelKind::RandomForest;
        cell.balanced_class_weight = options.balanced_class_weight;
        cell.threads = options.threads;
        s.forest = cell;
        specs.push_back(s);
    }
    return specs;
}

} // namespace

NestedCvResult nested_cv_auroc(const Eigen::MatrixXd& features, std::span<const int> labels,
                               const NestedCvOptions& options) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (n != labels.size()) throw std::invalid_argument("nested_cv_auroc: row/label mismatch");
    const auto specs = candidate_specs(options, static_cast<int>(features.cols()));

    const FoldPlan outer = stratified_kfold(labels, options.outer_k, derive_seed(options.seed, "outer-folds"));
    NestedCvResult result;
    result.predictions.assign(n, 0.0);

    for (int fold = 0; fold < options.outer_k; ++fold) {
        const auto train = outer.train_indices(fold);
        const auto test = outer.test_indices(fold);
        const Eigen::MatrixXd X_train = select_rows(features, train);
        const auto y_train = select(labels, train);
        const Eigen::MatrixXd X_test = select_rows(features, test);
        const auto y_test = select(labels, test);
        const std::uint64_t model_seed = derive_seed(options.seed, "model", static_cast<std::uint64_t>(fold));

        std::size_t best = 0;
        double best_auc = -std::numeric_limits<double>::infinity();
        if (specs.size() > 1) {
            FoldPlan inner;
            try {
                inner = stratified_kfold(y_train, options.inner_k,
                                         derive_seed(options.seed, "inner-folds", static_cast<std::uint64_t>(fold)));
            } catch (const DegenerateError& e) {
                throw DegenerateError(std::string("nested_cv_auroc: inner folds infeasible in outer fold ") +
                                      std::to_string(fold) + ": " + e.what());
            }
            std::vector<std::vector<std::size_t>> inner_train(static_cast<std::size_t>(options.inner_k));
            std::vector<std::vector<std::size_t>> inner_test(static_cast<std::size_t>(options.inner_k));
            for (int f = 0; f < options.inner_k; ++f) {
                inner_train[static_cast<std::size_t>(f)] = inner.train_indices(f);
                inner_test[static_cast<std::size_t>(f)] = inner.test_indices(f);
            }
            for (std::size_t c = 0; c < specs.size(); ++c) {
                double sum = 0.0;
                for (int f = 0; f < options.inner_k; ++f) {
                    const auto& tr = inner_train[static_cast<std::size_t>(f)];
                    const auto& te = inner_test[static_cast<std::size_t>(f)];
                    const auto pred = fit_predict(specs[c], select_rows(X_train, tr), select(y_train, tr),
                                                  select_rows(X_train, te), model_seed);
                    sum += auroc(pred, select(y_train, te));
                }
                const double mean_auc = sum / options.inner_k;
                if (mean_auc > best_auc) {
                    best_auc = mean_auc;
                    best = c;
                }
            }
        } else {
            best_auc = std::numeric_limits<double>::quiet_NaN();
        }

        const auto pred = fit_predict(specs[best], X_train, y_train, X_test, model_seed);
        FoldReport report;
        report.fold = fold;
        report.n_train = train.size();
        report.n_test = test.size();
        report.n_test_pos = static_cast<std::size_t>(std::count(y_test.begin(), y_test.end(), 1));
        report.inner_auroc = best_auc;
        report.test_auroc = auroc(pred, y_test);
        report.chosen = specs[best].describe();
        result.folds.push_back(report);
        for (std::size_t i = 0; i < test.size(); ++i) result.predictions[test[i]] = pred[i];
    }
    result.pooled = delong_ci(result.predictions, labels);
    return result;
}

HoldoutSummary repeated_holdout_auroc(const Eigen::MatrixXd& features, std::span<const int> labels,
                                      const ModelSpec& spec, std::span<const std::uint64_t> seeds,
                                      double test_fraction) {
    if (seeds.empty()) throw std::invalid_argument("repeated_holdout_auroc: no seeds");
    HoldoutSummary out;
    for (auto seed : seeds) {
        const auto split = stratified_holdout(labels, test_fraction, seed);
        const auto pred = fit_predict(spec, select_rows(features, split.train), select(labels, split.train),
                                      select_rows(features, split.test), derive_seed(seed, "holdout-model"));
        out.aurocs.push_back(auroc(pred, select(labels, split.test)));
    }
    out.mean = mean(out.aurocs);
    out.sd = sample_sd(out.aurocs);
    return out;
}

} // namespace rubricforge::stats
