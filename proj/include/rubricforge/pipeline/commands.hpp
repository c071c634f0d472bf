#pragma once

#include "rubricforge/corpus/corpus.hpp"
#include "rubricforge/corpus/score_matrix.hpp"
#include "rubricforge/llm/backend.hpp"
#include "rubricforge/llm/cache.hpp"
#include "rubricforge/llm/client.hpp"
#include "rubricforge/llm/embedding.hpp"
#include "rubricforge/pipeline/config.hpp"
#include "rubricforge/pipeline/manifest.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rubricforge::pipeline {

namespace fs = std::filesystem;

// Completion and embedding backends, cache and clients built from a config.
class Backends {
public:
    explicit Backends(const PipelineConfig& config);
    ~Backends();

    llm::LlmClient& client() { return *client_; }
    llm::EmbeddingClient& embedder();
    llm::ResponseCache* cache() { return cache_.get(); }

private:
    const PipelineConfig& config_;
    std::unique_ptr<llm::CompletionBackend> completion_;
    std::unique_ptr<llm::ResponseCache> cache_;
    std::unique_ptr<llm::LlmClient> client_;
    std::unique_ptr<llm::EmbeddingBackend> embedding_;
    std::unique_ptr<llm::EmbeddingClient> embedder_;
};

struct CommandResult {
    std::vector<fs::path> outputs;
    fs::path manifest;
    std::vector<std::string> warnings;
};

struct DiscoverArgs {
    fs::path corpus;
    fs::path output;  // default <output_dir>/discovery.json
};
CommandResult cmd_discover(const PipelineConfig& config, const DiscoverArgs& args, std::ostream& log);

struct ConsolidateArgs {
    fs::path discovery;
    fs::path corpus;  // needed unless scores is given
    fs::path scores;  // candidate ScoreMatrix; scored on demand when empty
    fs::path output_dir;
};
CommandResult cmd_consolidate(const PipelineConfig& config, const ConsolidateArgs& args, std::ostream& log);

struct ScoreArgs {
    fs::path rubric;
    fs::path corpus;
    std::string replicate_tag;  // default scoring.replicate_tag
    fs::path output;            // default <output_dir>/scores-<tag>.csv
};
CommandResult cmd_score(const PipelineConfig& config, const ScoreArgs& args, std::ostream& log);

struct EvaluateArgs {
    fs::path scores;
    fs::path corpus;
    fs::path external;          // CSV instance_id + feature columns; else corpus features
    fs::path candidate_scores;  // enables the per-agent comparison table
    fs::path output_dir;
};
CommandResult cmd_evaluate(const PipelineConfig& config, const EvaluateArgs& args, std::ostream& log);

struct AgreementArgs {
    fs::path run1;
    fs::path run2;
    fs::path human;
    fs::path output;  // default <output_dir>/agreement.csv
};
CommandResult cmd_agreement(const PipelineConfig& config, const AgreementArgs& args, std::ostream& log);

struct AssociateArgs {
    fs::path scores;
    fs::path corpus;
    std::string outcome;
    fs::path output;  // default <output_dir>/rate_ratios-<outcome>.csv
};
CommandResult cmd_associate(const PipelineConfig& config, const AssociateArgs& args, std::ostream& log);

struct StabilityArgs {
    std::vector<fs::path> rubrics;
    fs::path discovery;  // default: taken from the first rubric's manifest
    fs::path output;     // default <output_dir>/stability.json
};
CommandResult cmd_stability(const PipelineConfig& config, const StabilityArgs& args, std::ostream& log);

struct SynthArgs {
    fs::path spec;
    std::uint64_t seed = 0;
    fs::path output_dir;
};
CommandResult cmd_synth(const PipelineConfig& config, const SynthArgs& args, std::ostream& log);

struct SummarizeArgs {
    fs::path corpus;
    fs::path output;  // stem; default <output_dir>/corpus_summary
};
CommandResult cmd_summarize(const PipelineConfig& config, const SummarizeArgs& args, std::ostream& log);

struct CalibrationArgs {
    fs::path scores;
    fs::path corpus;  // optional; adds feedback text
    std::uint64_t seed = 0;
    fs::path output;  // default <output_dir>/calibration_sample.csv
};
CommandResult cmd_calibration_sample(const PipelineConfig& config, const CalibrationArgs& args, std::ostream& log);

struct MergeAnchorsArgs {
    fs::path rubric;
    fs::path additions;  // CSV dimension, level, text
    fs::path output;     // default <output_dir>/rubric-calibrated.json
};
CommandResult cmd_merge_anchors(const PipelineConfig& config, const MergeAnchorsArgs& args, std::ostream& log);

// Human ratings: instance_id, rater_id, then one 1..5 column per dimension.
struct HumanRatings {
    std::vector<std::string> raters;  // in order of first appearance
    std::vector<std::string> dimensions;
    // rater -> instance id -> scores in dimension order
    std::map<std::string, std::map<std::string, std::vector<int>>> scores;
};
HumanRatings read_human_ratings(const fs::path& path);

// Rounded mean of the raters' scores, halves rounded up.
int rounded_mean(const std::vector<int>& values);

} // namespace rubricforge::pipeline
