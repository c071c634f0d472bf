#pragma once

#include "rubricforge/corpus/corpus.hpp"
#include "rubricforge/corpus/score_matrix.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rubricforge {

inline constexpr std::size_t kSyntheticDimensions = 6;

// Names of the planted quality dimensions, in column order.
const std::array<std::string, kSyntheticDimensions>& synthetic_dimension_names();
// Cue phrase planted in the text for a dimension at a score level (1..5).
// Phrases are distinct and none is a substring of another.
const std::string& cue_phrase(std::size_t dimension, int level);
// Level whose cue phrase occurs in the text for the dimension, or 0.
int detect_cue_level(std::string_view text, std::size_t dimension);

struct OutcomeModel {
    double intercept = 0.0;
    std::array<double, kSyntheticDimensions> slopes{};
};

struct VocabularySeeding {
    double cue_rate = 1.0;       // probability each dimension's cue is written
    int max_filler_words = 3;    // uniform 0..max neutral words appended
};

struct SyntheticSpec {
    int n_cases = 0;
    int instances_per_case = 0;
    std::array<OutcomeModel, 4> outcomes{};  // indexed by Outcome
    double random_intercept_sd = 0.0;
    VocabularySeeding vocabulary;

    // Throws ConfigError on invalid values.
    void validate() const;
};

// JSON form:
// {"n_cases": 100, "instances_per_case": 50, "random_intercept_sd": 0.0,
//  "coefficients": {"behavior_adjustment": [intercept, b1, ..., b6], ...},
//  "vocabulary": {"cue_rate": 1.0, "max_filler_words": 3}}
// Outcomes missing from "coefficients" get all-zero coefficients.
SyntheticSpec parse_synthetic_spec(std::string_view json_text);
std::string format_synthetic_spec(const SyntheticSpec& spec);

struct SyntheticCorpus {
    Corpus corpus;
    ScoreMatrix planted;
    // Fixed-effect log-odds per instance and outcome (the generative score).
    std::vector<std::array<double, 4>> true_log_odds;
};

// Scores are uniform on 1..5 per dimension; each outcome is Bernoulli with
// log-odds intercept + slopes . scores + a case-level Normal(0, sd^2) draw.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

// Generative-truth JSON: coefficients, sd, and the AUROC of the true
// fixed-effect log-odds for every outcome.
std::string format_synthetic_truth(const SyntheticSpec& spec, const SyntheticCorpus& data, std::uint64_t seed);

struct PoissonPanel {
    std::vector<double> outcome;
    Eigen::MatrixXd features;  // uniform 1..5 integer scores
    std::vector<std::string> groups;
};

// Counts y ~ Poisson(exp(beta0 + x.beta + u_case)), u_case ~ Normal(0, sigma^2).
// beta holds the intercept first, then one slope per feature column.
PoissonPanel generate_poisson_panel(std::span<const double> beta, double sigma, int n_cases, int per_case,
                                    std::uint64_t seed);

} // namespace rubricforge
