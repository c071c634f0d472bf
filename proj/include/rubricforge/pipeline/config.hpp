#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rubricforge::pipeline {

struct BackendConfig {
    std::string kind = "mock";  // mock | openai
    std::string base_url = "https://api.openai.com/v1";
    std::string model_id = "gpt-4o";
    std::string embedding_kind = "hash";  // hash | openai
    std::string embedding_model = "text-embedding-3-small";
    int embedding_dimension = 256;
    double timeout_seconds = 120.0;
    int max_attempts = 5;
    double retry_base_delay = 1.0;
    std::string mock_scenario;
    std::uint64_t mock_seed = 0;
    double mock_candidate_noise = 0.1;
    std::string mock_noise_tag;
    double mock_noise_rate = 0.0;
    int mock_max_extra_criteria = 2;
    long long mock_fail_after = -1;  // negative disables
    std::string api_key;             // environment only
};

struct DiscoveryConfig {
    int n_agents = 5;
    int subset_size = 50;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    int max_criteria = 12;
};

struct ConsolidationConfig {
    double temperature = 0.0;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::string feature_mode = "correlation_rows";  // correlation_rows | one_minus_rho
    std::string missing = "pairwise";               // pairwise | listwise
    int k_min = 0;                                  // 0 selects 2..min(10, n-1)
    int k_max = 0;
};

struct ScoringConfig {
    double temperature = 0.0;
    int max_reprompts = 1;
    double failure_cap = 0.02;
    std::string replicate_tag = "run1";
};

struct EvaluationConfig {
    int outer_k = 5;
    int inner_k = 5;
    int comparison_inner_k = 3;  // models entering the prior vs AI comparison
    std::string model = "random_forest";  // random_forest | logistic
    std::uint64_t seed = 0;
    std::vector<int> n_estimators{200, 300, 400, 500, 1000};
    std::vector<int> max_features{10, 25, 50};
    std::vector<int> max_depth{20, 50};
    std::vector<int> min_samples_leaf{5, 20};
    double target_prevalence = 0.5;
    std::vector<std::uint64_t> holdout_seeds{0, 1, 2};
    double holdout_test_fraction = 0.2;
    double leakage_threshold = 0.99;
};

struct AgreementConfig {
    int bootstrap_replicates = 2000;
    std::uint64_t seed = 0;
};

struct AssociationConfig {
    bool standardize = false;
    bool robust_covariance = false;
    int max_iterations = 500;
};

struct StabilityConfig {
    double drift_threshold = 0.05;
    double coverage_threshold = 0.80;
    std::vector<double> sweep{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
};

struct RunConfig {
    int concurrency = 8;
    std::string cache_dir = ".rubricforge-cache";
    std::string output_dir = "out";
    bool progress = true;
};

struct PipelineConfig {
    BackendConfig backend;
    DiscoveryConfig discovery;
    ConsolidationConfig consolidation;
    ScoringConfig scoring;
    EvaluationConfig evaluation;
    AgreementConfig agreement;
    AssociationConfig association;
    StabilityConfig stability;
    RunConfig run;

    // Throws ConfigError on the first out-of-range value.
    void validate() const;
};

// One settable configuration entry, addressed as "section.key".
struct ConfigKey {
    std::string name;
    std::string help;
    std::function<void(const std::string&)> set;  // throws ConfigError on bad input
    std::function<std::string()> get;
};

std::vector<ConfigKey> config_keys(PipelineConfig& config);

// Sets one "section.key" from text; throws ConfigError on unknown keys.
void set_config_value(PipelineConfig& config, const std::string& name, const std::string& value);

// INI file: [section] headers and key = value lines.
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

// RUBRICFORGE_<SECTION>_<KEY> overrides every key; RUBRICFORGE_API_KEY or
// OPENAI_API_KEY supply the secret, RUBRICFORGE_BASE_URL the endpoint.
void apply_environment(PipelineConfig& config, const std::function<const char*(const char*)>& getenv);

std::string environment_name(const std::string& key_name);

// All keys and values (secrets excluded), ordered by key name.
std::map<std::string, std::string> config_snapshot(const PipelineConfig& config);
std::string format_config_ini(const PipelineConfig& config);

} // namespace rubricforge::pipeline
