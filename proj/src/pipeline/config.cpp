#include "rubricforge/pipeline/config.hpp"

#include "rubricforge/util/csv.hpp"
#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace rubricforge::pipeline {

namespace {

template <typename T>
T parse_integer(const std::string& name, const std::string& text) {
    const std::string t = trim(text);
    T v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(name + ": expected an integer, got \"" + text + "\"");
    return v;
}

double parse_real(const std::string& name, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
        throw ConfigError(name + ": expected a number, got \"" + text + "\"");
    return v;
}

bool parse_bool(const std::string& name, const std::string& text) {
    const std::string t = to_lower(trim(text));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(name + ": expected true or false, got \"" + text + "\"");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& name, const std::string& text, Parse parse) {
    std::vector<T> out;
    for (const auto& part : split(text, ',')) {
        if (trim(part).empty()) continue;
        out.push_back(parse(name, part));
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) out += format_double(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

ConfigKey key(std::string name, std::string help, int& field) {
    return {name, std::move(help), [&field, name](const std::string& s) { field = parse_integer<int>(name, s); },
            [&field] { return std::to_string(field); }};
}
ConfigKey key(std::string name, std::string help, long long& field) {
    return {name, std::move(help), [&field, name](const std::string& s) { field = parse_integer<long long>(name, s); },
            [&field] { return std::to_string(field); }};
}
ConfigKey key(std::string name, std::string help, std::uint64_t& field) {
    return {name, std::move(help),
            [&field, name](const std::string& s) { field = parse_integer<std::uint64_t>(name, s); },
            [&field] { return std::to_string(field); }};
}
ConfigKey key(std::string name, std::string help, double& field) {
    return {name, std::move(help), [&field, name](const std::string& s) { field = parse_real(name, s); },
            [&field] { return format_double(field); }};
}
ConfigKey key(std::string name, std::string help, bool& field) {
    return {name, std::move(help), [&field, name](const std::string& s) { field = parse_bool(name, s); },
            [&field] { return std::string(field ? "true" : "false"); }};
}
ConfigKey key(std::string name, std::string help, std::string& field) {
    return {name, std::move(help), [&field](const std::string& s) { field = trim(s); }, [&field] { return field; }};
}
ConfigKey key(std::string name, std::string help, std::vector<int>& field) {
    return {name, std::move(help),
            [&field, name](const std::string& s) { field = parse_list<int>(name, s, parse_integer<int>); },
            [&field] { return join(field); }};
}
ConfigKey key(std::string name, std::string help, std::vector<std::uint64_t>& field) {
    return {name, std::move(help),
            [&field, name](const std::string& s) {
                field = parse_list<std::uint64_t>(name, s, parse_integer<std::uint64_t>);
            },
            [&field] { return join(field); }};
}
ConfigKey key(std::string name, std::string help, std::vector<double>& field) {
    return {name, std::move(help), [&field, name](const std::string& s) { field = parse_list<double>(name, s, parse_real); },
            [&field] { return join(field); }};
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void require_temperature(double t, const char* name) {
    require(t >= 0.0 && t <= 2.0, std::string(name) + " must lie in [0, 2]");
}

} // namespace

std::vector<ConfigKey> config_keys(PipelineConfig& c) {
    auto& b = c.backend;
    auto& d = c.discovery;
    auto& k = c.consolidation;
    auto& s = c.scoring;
    auto& e = c.evaluation;
    auto& a = c.agreement;
    auto& g = c.association;
    auto& t = c.stability;
    auto& r = c.run;
    return {
        key("backend.kind", "completion backend: mock or openai", b.kind),
        key("backend.base_url", "OpenAI-compatible endpoint base URL", b.base_url),
        key("backend.model_id", "chat model id", b.model_id),
        key("backend.embedding_kind", "embedding backend: hash or openai", b.embedding_kind),
        key("backend.embedding_model", "embedding model id", b.embedding_model),
        key("backend.embedding_dimension", "hash embedding dimension", b.embedding_dimension),
        key("backend.timeout_seconds", "HTTP timeout per request", b.timeout_seconds),
        key("backend.max_attempts", "attempts per request on transport errors", b.max_attempts),
        key("backend.retry_base_delay", "first retry delay in seconds", b.retry_base_delay),
        key("backend.mock_scenario", "JSON file of scripted mock replies", b.mock_scenario),
        key("backend.mock_seed", "mock reply seed", b.mock_seed),
        key("backend.mock_candidate_noise", "mock per-criterion score noise", b.mock_candidate_noise),
        key("backend.mock_noise_tag", "replicate tag receiving extra mock noise", b.mock_noise_tag),
        key("backend.mock_noise_rate", "probability of a +-1 shift under the noise tag", b.mock_noise_rate),
        key("backend.mock_max_extra_criteria", "extra criteria per mock discovery reply", b.mock_max_extra_criteria),
        key("backend.mock_fail_after", "mock calls before a simulated interruption (-1 off)", b.mock_fail_after),
        key("discovery.n_agents", "independent discovery agents", d.n_agents),
        key("discovery.subset_size", "feedback examples per agent", d.subset_size),
        key("discovery.temperature", "discovery sampling temperature", d.temperature),
        key("discovery.seed", "subset sampling seed", d.seed),
        key("discovery.max_criteria", "criteria kept per agent", d.max_criteria),
        key("consolidation.temperature", "consolidation temperature", k.temperature),
        key("consolidation.seeds", "consolidation repetition seeds", k.seeds),
        key("consolidation.feature_mode", "correlation_rows or one_minus_rho", k.feature_mode),
        key("consolidation.missing", "pairwise or listwise masked-row handling", k.missing),
        key("consolidation.k_min", "smallest k searched (0 = default)", k.k_min),
        key("consolidation.k_max", "largest k searched (0 = default)", k.k_max),
        key("scoring.temperature", "scoring temperature", s.temperature),
        key("scoring.max_reprompts", "re-asks after an unparseable reply", s.max_reprompts),
        key("scoring.failure_cap", "tolerated fraction of failed instances", s.failure_cap),
        key("scoring.replicate_tag", "cache tag distinguishing repeated runs", s.replicate_tag),
        key("evaluation.outer_k", "outer cross-validation folds", e.outer_k),
        key("evaluation.inner_k", "inner cross-validation folds", e.inner_k),
        key("evaluation.comparison_inner_k", "inner folds of the prior vs AI comparison models", e.comparison_inner_k),
        key("evaluation.model", "random_forest or logistic", e.model),
        key("evaluation.seed", "cross-validation seed", e.seed),
        key("evaluation.n_estimators", "forest grid: trees", e.n_estimators),
        key("evaluation.max_features", "forest grid: features per split", e.max_features),
        key("evaluation.max_depth", "forest grid: depth", e.max_depth),
        key("evaluation.min_samples_leaf", "forest grid: leaf size", e.min_samples_leaf),
        key("evaluation.target_prevalence", "rare-event weighting target prevalence", e.target_prevalence),
        key("evaluation.holdout_seeds", "seeds of the repeated 80/20 splits", e.holdout_seeds),
        key("evaluation.holdout_test_fraction", "test share of each split", e.holdout_test_fraction),
        key("evaluation.leakage_threshold", "AUROC at or above which a row is flagged", e.leakage_threshold),
        key("agreement.bootstrap_replicates", "kappa bootstrap resamples", a.bootstrap_replicates),
        key("agreement.seed", "kappa bootstrap seed", a.seed),
        key("association.standardize", "standardize GLMM covariates", g.standardize),
        key("association.robust_covariance", "cluster-robust GLMM standard errors", g.robust_covariance),
        key("association.max_iterations", "GLMM outer iterations", g.max_iterations),
        key("stability.drift_threshold", "near-duplicate drift threshold", t.drift_threshold),
        key("stability.coverage_threshold", "coverage cosine threshold", t.coverage_threshold),
        key("stability.sweep", "thresholds of the coverage sweep", t.sweep),
        key("run.concurrency", "parallel backend requests", r.concurrency),
        key("run.cache_dir", "response cache directory", r.cache_dir),
        key("run.output_dir", "artifact directory", r.output_dir),
        key("run.progress", "report progress on stderr", r.progress),
    };
}

void PipelineConfig::validate() const {
    require(backend.kind == "mock" || backend.kind == "openai", "backend.kind must be mock or openai");
    require(backend.embedding_kind == "hash" || backend.embedding_kind == "openai",
            "backend.embedding_kind must be hash or openai");
    require(!backend.model_id.empty(), "backend.model_id must not be empty");
    require(backend.embedding_dimension >= 1, "backend.embedding_dimension must be positive");
    require(backend.timeout_seconds > 0.0, "backend.timeout_seconds must be positive");
    require(backend.max_attempts >= 1, "backend.max_attempts must be at least 1");
    require(backend.retry_base_delay >= 0.0, "backend.retry_base_delay must be nonnegative");
    require(backend.mock_candidate_noise >= 0.0 && backend.mock_candidate_noise <= 1.0,
            "backend.mock_candidate_noise must lie in [0, 1]");
    require(backend.mock_noise_rate >= 0.0 && backend.mock_noise_rate <= 1.0, "backend.mock_noise_rate must lie in [0, 1]");
    require(backend.mock_max_extra_criteria >= 0, "backend.mock_max_extra_criteria must be nonnegative");
    require(discovery.n_agents >= 1, "discovery.n_agents must be at least 1");
    require(discovery.subset_size >= 1, "discovery.subset_size must be at least 1");
    require_temperature(discovery.temperature, "discovery.temperature");
    require(discovery.max_criteria >= 1, "discovery.max_criteria must be at least 1");
    require_temperature(consolidation.temperature, "consolidation.temperature");
    require(!consolidation.seeds.empty(), "consolidation.seeds must not be empty");
    require(consolidation.feature_mode == "correlation_rows" || consolidation.feature_mode == "one_minus_rho",
            "consolidation.feature_mode must be correlation_rows or one_minus_rho");
    require(consolidation.missing == "pairwise" || consolidation.missing == "listwise",
            "consolidation.missing must be pairwise or listwise");
    require(consolidation.k_min == 0 || consolidation.k_min >= 2, "consolidation.k_min must be 0 or at least 2");
    require(consolidation.k_max == 0 || consolidation.k_max >= 2, "consolidation.k_max must be 0 or at least 2");
    require(consolidation.k_min == 0 || consolidation.k_max == 0 || consolidation.k_min <= consolidation.k_max,
            "consolidation.k_min must not exceed consolidation.k_max");
    require_temperature(scoring.temperature, "scoring.temperature");
    require(scoring.max_reprompts >= 0, "scoring.max_reprompts must be nonnegative");
    require(scoring.failure_cap >= 0.0 && scoring.failure_cap <= 1.0, "scoring.failure_cap must lie in [0, 1]");
    require(!scoring.replicate_tag.empty(), "scoring.replicate_tag must not be empty");
    require(evaluation.outer_k >= 2, "evaluation.outer_k must be at least 2");
    require(evaluation.inner_k >= 2, "evaluation.inner_k must be at least 2");
    require(evaluation.comparison_inner_k >= 2, "evaluation.comparison_inner_k must be at least 2");
    require(evaluation.model == "random_forest" || evaluation.model == "logistic",
            "evaluation.model must be random_forest or logistic");
    for (const auto* grid : {&evaluation.n_estimators, &evaluation.max_features, &evaluation.max_depth,
                             &evaluation.min_samples_leaf}) {
        require(!grid->empty(), "evaluation grid values must not be empty");
        for (int v : *grid) require(v >= 1, "evaluation grid values must be positive");
    }
    require(evaluation.target_prevalence > 0.0 && evaluation.target_prevalence < 1.0,
            "evaluation.target_prevalence must lie in (0, 1)");
    require(!evaluation.holdout_seeds.empty(), "evaluation.holdout_seeds must not be empty");
    require(evaluation.holdout_test_fraction > 0.0 && evaluation.holdout_test_fraction < 1.0,
            "evaluation.holdout_test_fraction must lie in (0, 1)");
    require(evaluation.leakage_threshold > 0.5 && evaluation.leakage_threshold <= 1.0,
            "evaluation.leakage_threshold must lie in (0.5, 1]");
    require(agreement.bootstrap_replicates >= 1, "agreement.bootstrap_replicates must be positive");
    require(association.max_iterations >= 1, "association.max_iterations must be positive");
    require(stability.drift_threshold >= 0.0 && stability.drift_threshold <= 2.0,
            "stability.drift_threshold must lie in [0, 2]");
    require(stability.coverage_threshold >= -1.0 && stability.coverage_threshold <= 1.0,
            "stability.coverage_threshold must lie in [-1, 1]");
    require(!stability.sweep.empty(), "stability.sweep must not be empty");
    for (double v : stability.sweep) require(v >= -1.0 && v <= 1.0, "stability.sweep values must lie in [-1, 1]");
    require(run.concurrency >= 1, "run.concurrency must be at least 1");
    require(!run.output_dir.empty(), "run.output_dir must not be empty");
}

void set_config_value(PipelineConfig& config, const std::string& name, const std::string& value) {
    for (auto& k : config_keys(config))
        if (k.name == name) {
            k.set(value);
            return;
        }
    throw ConfigError("unknown configuration key \"" + name + "\"");
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("configuration file not found: " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError(path.string() + ": key \"" + section + "\" lies outside a section");
        for (const auto& [name, value] : body) {
            try {
                set_config_value(config, section + "." + name, value.data());
            } catch (const ConfigError& e) {
                throw ConfigError(path.string() + ": " + e.what());
            }
        }
    }
}

std::string environment_name(const std::string& key_name) {
    std::string out = "RUBRICFORGE_";
    for (char ch : key_name) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

void apply_environment(PipelineConfig& config, const std::function<const char*(const char*)>& getenv) {
    for (auto& k : config_keys(config)) {
        const std::string env = environment_name(k.name);
        if (const char* v = getenv(env.c_str()); v && *v) {
            try {
                k.set(v);
            } catch (const ConfigError& e) {
                throw ConfigError(env + ": " + e.what());
            }
        }
    }
    for (const char* name : {"RUBRICFORGE_API_KEY", "OPENAI_API_KEY"})
        if (const char* v = getenv(name); v && *v) {
            config.backend.api_key = v;
            break;
        }
    if (const char* v = getenv("RUBRICFORGE_BASE_URL"); v && *v) config.backend.base_url = v;
}

std::map<std::string, std::string> config_snapshot(const PipelineConfig& config) {
    PipelineConfig copy = config;
    std::map<std::string, std::string> out;
    for (const auto& k : config_keys(copy)) out[k.name] = k.get();
    return out;
}

std::string format_config_ini(const PipelineConfig& config) {
    PipelineConfig copy = config;
    std::string out, section;
    for (const auto& k : config_keys(copy)) {
        const auto dot = k.name.find('.');
        const std::string sec = k.name.substr(0, dot);
        if (sec != section) {
            out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
            section = sec;
        }
        out += "; " + k.help + "\n" + k.name.substr(dot + 1) + " = " + k.get() + "\n";
    }
    return out;
}

} // namespace rubricforge::pipeline
