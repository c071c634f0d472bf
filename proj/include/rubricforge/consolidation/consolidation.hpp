#pragma once

#include "rubricforge/corpus/corpus.hpp"
#include "rubricforge/corpus/score_matrix.hpp"
#include "rubricforge/judge/judge.hpp"
#include "rubricforge/llm/client.hpp"
#include "rubricforge/rubric/rubric.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rubricforge::consolidation {

// Scores every candidate over the corpus; each agent's criteria share one
// scoring request per instance. Columns are named by CandidateCriterion::ref()
// in criteria order.
judge::ScoringRun score_candidates(llm::LlmClient& client, const Corpus& corpus,
                                   const std::vector<CandidateCriterion>& criteria,
                                   const judge::JudgeOptions& options = {},
                                   const std::string& replicate_tag = "candidates");

enum class MissingRows { Pairwise, Listwise };

struct CorrelationMatrix {
    Eigen::MatrixXd rho;
    std::vector<std::string> ids;
    // Columns with zero variance; their off-diagonal entries are 0.
    std::vector<bool> zero_variance;
    std::vector<std::string> warnings;
};

// Spearman rho between all column pairs over rows unmasked in both (pairwise)
// or in every column (listwise). Throws std::invalid_argument for fewer than
// two columns and DegenerateError when a pair has fewer than 3 shared rows.
CorrelationMatrix spearman_correlation_matrix(const ScoreMatrix& scores,
                                              MissingRows missing = MissingRows::Pairwise);

struct Merge {
    std::size_t left = 0;   // cluster ids: points 0..n-1, then n + merge index
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t n = 0;
    std::vector<Merge> merges;  // n - 1 merges, nondecreasing heights
};

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& features);

// Agglomerative single linkage on a symmetric distance matrix. Among equally
// close pairs the one with the lowest (smaller member, larger member) point
// indices merges first.
Dendrogram single_linkage(const Eigen::MatrixXd& distances);
Dendrogram single_linkage_cluster(const Eigen::MatrixXd& features);

// Flat labels after applying the first n - k merges, numbered 0.. in order of
// each cluster's first point.
std::vector<int> cut_dendrogram(const Dendrogram& d, std::size_t k);

// Mean silhouette over all points; points in singleton clusters score 0.
double mean_silhouette(const Eigen::MatrixXd& distances, const std::vector<int>& labels);

struct SilhouetteRow {
    std::size_t k = 0;
    double mean_silhouette = 0.0;
};

struct KSelection {
    std::size_t k_best = 0;
    std::vector<SilhouetteRow> table;
};

// Default k range is 2..min(10, n - 1). Ties go to the smallest k.
std::pair<std::size_t, std::size_t> default_k_range(std::size_t n);
KSelection select_k_by_silhouette(const Dendrogram& d, const Eigen::MatrixXd& distances, std::size_t k_min,
                                  std::size_t k_max);

enum class FeatureMode {
    CorrelationRows,  // Euclidean distance between rows of the correlation matrix
    OneMinusRho,      // distance 1 - rho
};

Eigen::MatrixXd clustering_distances(const Eigen::MatrixXd& rho, FeatureMode mode);

struct ConsolidationOptions {
    std::string model_id = "gpt-4o";
    double temperature = 0.0;
    std::uint64_t seed = 0;
    std::size_t concurrency = 6;

    void validate() const;
};

// One consolidation call per cluster, then one anchor call in the discovery
// row format. Repeated names get " (2)", " (3)" ... with a warning.
Rubric consolidate_clusters(llm::LlmClient& client, const std::vector<std::vector<CandidateCriterion>>& clusters,
                            const ConsolidationOptions& options = {});

// Each rubric dimension as a single-member cluster.
std::vector<std::vector<CandidateCriterion>> clusters_from_rubric(const Rubric& rubric);

std::vector<std::vector<CandidateCriterion>> group_by_labels(const std::vector<CandidateCriterion>& criteria,
                                                             const std::vector<int>& labels);

struct CalibrationAddition {
    std::string dimension;
    int level = 0;
    std::string text;
};

struct RejectedAddition {
    CalibrationAddition addition;
    std::string reason;
};

struct MergeReport {
    Rubric rubric;
    std::size_t accepted = 0;
    std::vector<RejectedAddition> rejected;
};

inline constexpr std::size_t kMaxCalibrationExamples = 2;

// Appends calibration examples, at most two per (dimension, anchor). Throws
// DataError on an unknown dimension, std::invalid_argument on a level other
// than 1, 3 or 5.
MergeReport merge_calibration_examples(const Rubric& rubric, const std::vector<CalibrationAddition>& additions);

// CSV with columns dimension, level, text.
std::vector<CalibrationAddition> read_calibration_additions(const std::filesystem::path& path);

struct ClusteringOptions {
    MissingRows missing = MissingRows::Pairwise;
    FeatureMode features = FeatureMode::CorrelationRows;
    std::size_t k_min = 0;  // 0 selects the default range
    std::size_t k_max = 0;
};

struct ClusteringResult {
    CorrelationMatrix correlation;
    Eigen::MatrixXd distances;
    Dendrogram dendrogram;
    KSelection selection;  // empty table when fewer than 3 criteria
    std::vector<int> labels;
};

// Correlation, single linkage and silhouette selection. With one criterion
// the result is a single cluster; with two, each is its own cluster.
ClusteringResult cluster_criteria(const ScoreMatrix& scores, const ClusteringOptions& options = {});

} // namespace rubricforge::consolidation
