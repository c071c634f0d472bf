#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rubricforge::stats {

struct FoldPlan {
    std::vector<int> fold_of;  // instance index -> fold id in [0, k)
    int k = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::size_t> train_indices(int fold) const;
};

// Stratified k-fold assignment. Each class is shuffled and dealt round-robin,
// the negatives continuing where the positives stopped, so fold sizes differ
// by at most one and per-fold positive counts are floor or ceil of P/k.
// Throws when either class has fewer than k members.
FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

struct HoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Stratified single train/test split; round(test_fraction * class size) of
// each class goes to the test side.
HoldoutSplit stratified_holdout(std::span<const int> labels, double test_fraction, std::uint64_t seed);

} // namespace rubricforge::stats
