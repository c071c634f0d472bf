#pragma once

#include "rubricforge/corpus/corpus.hpp"
#include "rubricforge/corpus/score_matrix.hpp"
#include "rubricforge/llm/client.hpp"
#include "rubricforge/rubric/rubric.hpp"
#include "rubricforge/stats/kappa.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rubricforge::judge {

struct JudgeOptions {
    std::string model_id = "gpt-4o";
    double temperature = 0.0;
    int max_reprompts = 1;
    std::size_t concurrency = 8;
    // Largest tolerated fraction of instances that fail to parse.
    double failure_cap = 0.02;

    void validate() const;
};

// A reply that stayed unparseable after all re-asks.
class ScoringError : public ParseError {
public:
    ScoringError(std::string instance_id, const std::string& what, std::string raw)
        : ParseError(what, std::move(raw)), instance_id_(std::move(instance_id)) {}
    const std::string& instance_id() const noexcept { return instance_id_; }

private:
    std::string instance_id_;
};

// One rendered scoring request per call; on a parse failure the same prompt is
// re-sent with a format reminder appended, up to max_reprompts times.
std::vector<int> score_instance(llm::LlmClient& client, const Rubric& rubric, const FeedbackInstance& instance,
                                const std::string& replicate_tag, const JudgeOptions& options = {});

struct ScoringFailure {
    std::string instance_id;
    std::string message;
    std::string raw;
};

struct ScoringRun {
    ScoreMatrix scores;
    std::vector<ScoringFailure> failures;  // in corpus order
    std::string replicate_tag;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Scores every instance; failed rows are masked and reported. Throws DataError
// when the failed fraction exceeds options.failure_cap. Backend errors abort.
ScoringRun score_corpus(llm::LlmClient& client, const Rubric& rubric, const Corpus& corpus,
                        const std::string& replicate_tag, const JudgeOptions& options = {},
                        const ProgressFn& progress = {});

struct DimensionAgreement {
    std::string dimension;
    stats::KappaEstimate estimate;
};

// Quadratically weighted kappa per shared dimension over rows unmasked in both
// matrices, matched by instance id, with bootstrap CIs.
std::vector<DimensionAgreement> matrix_agreement(const ScoreMatrix& a, const ScoreMatrix& b,
                                                 std::size_t replicates = 2000, std::uint64_t seed = 0);

// Scores the corpus under tags "run1" and "run2" and compares the runs.
std::vector<DimensionAgreement> repeat_agreement(llm::LlmClient& client, const Rubric& rubric, const Corpus& corpus,
                                                 const JudgeOptions& options = {}, std::size_t replicates = 2000,
                                                 std::uint64_t seed = 0);

} // namespace rubricforge::judge
