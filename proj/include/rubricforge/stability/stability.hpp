#pragma once

#include "rubricforge/llm/embedding.hpp"
#include "rubricforge/rubric/rubric.hpp"

#include <string>
#include <vector>

namespace rubricforge::stability {

inline constexpr double kDriftThreshold = 0.05;
inline constexpr double kCoverageThreshold = 0.80;

struct DriftReport {
    std::vector<double> per_index;  // mean cosine distance per cluster index
    double overall = 0.0;           // mean over every same-index pair
    std::size_t seed_pairs = 0;
    std::size_t rubrics = 0;
    double threshold = kDriftThreshold;
    bool below_threshold = true;
};

// 1 - cos between definitions sharing a cluster index, over all rubric pairs.
// Throws DataError on fewer than two rubrics or unequal dimension counts.
DriftReport cross_seed_drift(llm::EmbeddingClient& embedder, const std::vector<Rubric>& rubrics,
                             double threshold = kDriftThreshold);

// Lowercased tokens with punctuation removed; contiguous n-grams for each
// order (all unigrams, then bigrams, ...), first occurrence kept.
std::vector<std::string> ngrams(std::string_view text, const std::vector<int>& orders = {1, 2, 3});

// Name, definition and anchor descriptions of every dimension.
std::vector<std::string> rubric_texts(const Rubric& rubric);
// Name, definition and anchors of every candidate.
std::vector<std::string> candidate_texts(const std::vector<CandidateCriterion>& criteria);

struct CoverageReport {
    std::size_t covered_terms = 0;
    std::size_t total_terms = 0;
    double coverage_fraction = 0.0;
    double similarity_threshold = kCoverageThreshold;
    // Coverage counts distinct n-gram types.
    const char* counting = "types";
};

struct TermSimilarities {
    std::vector<std::string> brainstorm_terms;
    std::vector<std::string> rubric_terms;
    std::vector<double> best;  // max cosine to any rubric term, per brainstorm term
};

TermSimilarities term_similarities(llm::EmbeddingClient& embedder, const std::vector<std::string>& brainstorm_texts,
                                   const Rubric& rubric);
CoverageReport coverage_at(const TermSimilarities& sims, double threshold);

// Throws std::invalid_argument on empty brainstorm_texts.
CoverageReport vocabulary_coverage(llm::EmbeddingClient& embedder, const std::vector<std::string>& brainstorm_texts,
                                   const Rubric& rubric, double threshold = kCoverageThreshold);

std::vector<CoverageReport> coverage_sweep(const TermSimilarities& sims, const std::vector<double>& thresholds);

} // namespace rubricforge::stability
