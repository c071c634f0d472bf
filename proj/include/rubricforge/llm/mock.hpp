#pragma once

#include "rubricforge/llm/backend.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace rubricforge::llm {

struct MockOptions {
    std::uint64_t seed = 0;
    // Probability that a synthesized score for a candidate criterion is
    // shifted by one level. Depends only on (criterion name, feedback text),
    // so repeated runs agree.
    double candidate_noise = 0.1;
    // Requests whose replicate_tag equals noise_tag get symmetric +-1 noise
    // with probability noise_rate on every score.
    std::string noise_tag;
    double noise_rate = 0.0;
    // Number of criteria rows synthesized per discovery reply: one per
    // concept plus up to this many extra variants.
    int max_extra_criteria = 2;
    // Simulated interruption: calls beyond this count throw a
    // non-retryable BackendError.
    std::optional<std::size_t> fail_after;
};

// Deterministic completion backend. A reply is taken from the scenario
// (prompt fingerprint -> text) when present; otherwise a well-formed reply
// is synthesized from the prompt kind:
//   discovery      pipe rows drawn from six built-in feedback concepts
//   consolidation  the first member echoed as a tuple
//   anchor         the first member's anchors echoed as one row
//   scoring        per criterion, the cue level planted in the feedback text
//                  for the concept its name refers to (3 when absent)
class MockCompletionBackend : public CompletionBackend {
public:
    explicit MockCompletionBackend(MockOptions options = {}, std::map<std::string, std::string> scenario = {});

    // "mock-" plus a digest of the options and scenario that shape replies
    // (fail_after excluded, so an interrupted run resumes from its cache).
    std::string id() const override { return id_; }
    CompletionResponse complete(const CompletionRequest& request) override;

    // Loads a scenario file: a JSON object mapping fingerprints to replies.
    static std::map<std::string, std::string> load_scenario(const std::filesystem::path& path);

    std::size_t calls() const { return calls_.load(); }
    const MockOptions& options() const { return options_; }

private:
    std::string synthesize(const CompletionRequest& request) const;

    MockOptions options_;
    std::map<std::string, std::string> scenario_;
    std::string id_;
    std::atomic<std::size_t> calls_{0};
};

// Concept index (0..5) a criterion name refers to, or -1.
int mock_concept_of(std::string_view criterion_name);

// Embedding backend mapping each distinct text to a pseudo-random unit
// vector seeded by the text's hash.
class HashEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HashEmbeddingBackend(std::size_t dimension = 256) : dimension_(dimension) {}
    std::string id() const override { return "hash-embedding-" + std::to_string(dimension_); }
    std::size_t dimension() const override { return dimension_; }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    std::size_t dimension_;
};

} // namespace rubricforge::llm
