#include "rubricforge/stats/cv.hpp"

#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rubricforge::stats {

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] != fold) out.push_back(i);
    return out;
}

FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be at least 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) pos.push_back(i);
        else if (labels[i] == 0) neg.push_back(i);
        else throw std::invalid_argument("stratified_kfold: labels must be 0 or 1");
    }
    const auto kk = static_cast<std::size_t>(k);
    if (pos.size() < kk || neg.size() < kk) {
        throw DegenerateError("stratified_kfold: class counts (" + std::to_string(pos.size()) + " positive, " +
                              std::to_string(neg.size()) + " negative) are smaller than k=" + std::to_string(k));
    }
    Rng rng(seed, "stratified-kfold");
    rng.shuffle(pos);
    rng.shuffle(neg);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of.assign(labels.size(), -1);
    std::size_t slot = 0;
    for (auto i : pos) plan.fold_of[i] = static_cast<int>(slot++ % kk);
    for (auto i : neg) plan.fold_of[i] = static_cast<int>(slot++ % kk);
    return plan;
}

HoldoutSplit stratified_holdout(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("stratified_holdout: test_fraction must be in (0,1)");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    Rng rng(seed, "stratified-holdout");
    rng.shuffle(pos);
    rng.shuffle(neg);
    HoldoutSplit split;
    for (auto* cls : {&pos, &neg}) {
        const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(cls->size())));
        if (n_test == 0 || n_test == cls->size())
            throw DegenerateError("stratified_holdout: a class is too small to split");
        for (std::size_t i = 0; i < cls->size(); ++i) (i < n_test ? split.test : split.train).push_back((*cls)[i]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

} // namespace rubricforge::stats
