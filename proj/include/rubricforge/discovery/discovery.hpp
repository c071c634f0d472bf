#pragma once

#include "rubricforge/corpus/corpus.hpp"
#include "rubricforge/llm/client.hpp"
#include "rubricforge/llm/parsers.hpp"
#include "rubricforge/llm/prompts.hpp"
#include "rubricforge/rubric/rubric.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rubricforge::discovery {

struct DiscoveryOptions {
    int n_agents = 5;
    std::size_t subset_size = 50;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    std::string model_id = "gpt-4o";
    // Criteria kept per agent; extra rows are dropped and reported.
    std::size_t max_criteria = 12;
    std::size_t concurrency = 5;
    std::vector<llm::OutcomeDefinition> outcomes = llm::default_outcome_definitions();

    void validate() const;
};

struct AgentRun {
    int agent_id = 0;
    std::vector<std::string> subset_ids;
    std::string fingerprint;  // prompt fingerprint of the request
    std::string cache_key;
    std::vector<CandidateCriterion> criteria;
    std::vector<llm::SkippedRow> skipped;
    std::size_t dropped = 0;  // rows beyond max_criteria
    // Set when the reply yielded no criteria.
    std::optional<std::string> error;
    std::string raw;  // reply text, kept for failed runs

    bool ok() const { return !error.has_value(); }
};

struct DiscoveryResult {
    std::vector<AgentRun> runs;  // ordered by agent id
    DiscoveryOptions options;

    std::vector<CandidateCriterion> criteria() const;
};

// Raised when any agent produced no criteria; carries every run, including
// the successful ones, for inspection.
class DiscoveryError : public DataError {
public:
    DiscoveryError(const std::string& what, DiscoveryResult partial)
        : DataError(what), partial_(std::move(partial)) {}
    const DiscoveryResult& partial() const noexcept { return partial_; }

private:
    DiscoveryResult partial_;
};

// One completion per agent over its own subset from sample_discovery_subsets.
DiscoveryResult run_discovery(llm::LlmClient& client, const Corpus& corpus, const DiscoveryOptions& options);

std::string format_discovery_json(const DiscoveryResult& result);
DiscoveryResult parse_discovery_json(std::string_view text);
void write_discovery(const std::filesystem::path& path, const DiscoveryResult& result);
DiscoveryResult read_discovery(const std::filesystem::path& path);

} // namespace rubricforge::discovery
