#include "rubricforge/corpus/synthetic.hpp"

#include "rubricforge/stats/roc.hpp"
#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/io.hpp"
#include "rubricforge/util/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace rubricforge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::array<std::array<std::string, 5>, kSyntheticDimensions> kLexicon{{
    {"that was poor work", "not quite there yet", "that is acceptable", "good job on that", "excellent work keep going"},
    {"whenever you get a chance", "at some point later", "fairly soon please", "do it right now", "stop immediately"},
    {"something seems off", "think about the angle", "adjust your grip a bit", "rotate the needle clockwise",
     "grasp the tissue two centimeters lower"},
    {"back in the last case", "earlier today", "a few minutes ago", "just now", "as you are doing it"},
    {"um well sort of", "kind of maybe", "roughly this way", "clearly like this", "exactly this motion"},
    {"just do as told", "remember the rule", "notice the result", "why did that bleed",
     "what would you change next time"},
}};

const std::array<std::string, 8> kFiller{"okay", "alright", "so", "yes", "hmm", "careful", "right", "good"};

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

} // namespace

const std::array<std::string, kSyntheticDimensions>& synthetic_dimension_names() {
    static const std::array<std::string, kSyntheticDimensions> names{"Encouragement", "Urgency",  "Actionability",
                                                                     "Timeliness",    "Clarity",  "Reflection"};
    return names;
}

const std::string& cue_phrase(std::size_t dimension, int level) {
    if (dimension >= kSyntheticDimensions || level < 1 || level > 5) throw std::out_of_range("cue_phrase");
    return kLexicon[dimension][static_cast<std::size_t>(level - 1)];
}

int detect_cue_level(std::string_view text, std::size_t dimension) {
    if (dimension >= kSyntheticDimensions) return 0;
    const std::string lower = to_lower(text);
    for (int level = 1; level <= 5; ++level)
        if (lower.find(kLexicon[dimension][static_cast<std::size_t>(level - 1)]) != std::string::npos) return level;
    return 0;
}

void SyntheticSpec::validate() const {
    if (n_cases < 1) throw ConfigError("synthetic spec: n_cases must be positive");
    if (instances_per_case < 1) throw ConfigError("synthetic spec: instances_per_case must be positive");
    if (!(random_intercept_sd >= 0.0) || !std::isfinite(random_intercept_sd))
        throw ConfigError("synthetic spec: random_intercept_sd must be >= 0");
    if (!(vocabulary.cue_rate >= 0.0 && vocabulary.cue_rate <= 1.0))
        throw ConfigError("synthetic spec: cue_rate must be in [0, 1]");
    if (vocabulary.max_filler_words < 0) throw ConfigError("synthetic spec: max_filler_words must be >= 0");
    for (const auto& m : outcomes) {
        if (!std::isfinite(m.intercept)) throw ConfigError("synthetic spec: non-finite coefficient");
        for (double s : m.slopes)
            if (!std::isfinite(s)) throw ConfigError("synthetic spec: non-finite coefficient");
    }
}

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("synthetic spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("synthetic spec: expected an object");
    SyntheticSpec spec;
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "n_cases") spec.n_cases = v.get<int>();
            else if (k == "instances_per_case") spec.instances_per_case = v.get<int>();
            else if (k == "random_intercept_sd") spec.random_intercept_sd = v.get<double>();
            else if (k == "coefficients") {
                for (const auto& [name, arr] : v.items()) {
                    const auto o = outcome_from_key(name);
                    if (!o) throw ConfigError("synthetic spec: unknown outcome \"" + name + "\"");
                    if (!arr.is_array() || arr.size() != kSyntheticDimensions + 1)
                        throw ConfigError("synthetic spec: coefficients for " + name +
                                          " must list 7 numbers (intercept then 6 slopes)");
                    auto& m = spec.outcomes[static_cast<std::size_t>(*o)];
                    m.intercept = arr[0].get<double>();
                    for (std::size_t d = 0; d < kSyntheticDimensions; ++d) m.slopes[d] = arr[d + 1].get<double>();
                }
            } else if (k == "vocabulary") {
                for (const auto& [vk, vv] : v.items()) {
                    if (vk == "cue_rate") spec.vocabulary.cue_rate = vv.get<double>();
                    else if (vk == "max_filler_words") spec.vocabulary.max_filler_words = vv.get<int>();
                    else throw ConfigError("synthetic spec: unknown vocabulary key \"" + vk + "\"");
                }
            } else {
                throw ConfigError("synthetic spec: unknown key \"" + k + "\"");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string format_synthetic_spec(const SyntheticSpec& spec) {
    ordered_json j;
    j["n_cases"] = spec.n_cases;
    j["instances_per_case"] = spec.instances_per_case;
    j["random_intercept_sd"] = spec.random_intercept_sd;
    ordered_json coef;
    for (auto o : kOutcomes) {
        const auto& m = spec.outcomes[static_cast<std::size_t>(o)];
        ordered_json arr = ordered_json::array({m.intercept});
        for (double s : m.slopes) arr.push_back(s);
        coef[outcome_key(o)] = arr;
    }
    j["coefficients"] = coef;
    j["vocabulary"] = {{"cue_rate", spec.vocabulary.cue_rate}, {"max_filler_words", spec.vocabulary.max_filler_words}};
    return j.dump(2) + "\n";
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    SyntheticCorpus out;
    const std::size_t n = static_cast<std::size_t>(spec.n_cases) * static_cast<std::size_t>(spec.instances_per_case);
    std::vector<std::string> ids, cases;
    ids.reserve(n);
    cases.reserve(n);
    const auto& names = synthetic_dimension_names();

    Rng rng(seed, "synthetic-corpus");
    std::vector<std::array<int, kSyntheticDimensions>> scores;
    scores.reserve(n);
    for (int c = 0; c < spec.n_cases; ++c) {
        const std::string case_id = "case-" + std::to_string(c + 1);
        std::array<double, 4> u{};
        for (auto& v : u) v = spec.random_intercept_sd > 0.0 ? rng.normal(0.0, spec.random_intercept_sd) : 0.0;
        for (int i = 0; i < spec.instances_per_case; ++i) {
            FeedbackInstance inst;
            inst.id = "fb-" + std::to_string(out.corpus.instances.size() + 1);
            inst.case_id = case_id;
            std::array<int, kSyntheticDimensions> s{};
            for (auto& v : s) v = static_cast<int>(rng.uniform_int(1, 5));

            std::vector<std::size_t> order(kSyntheticDimensions);
            for (std::size_t d = 0; d < order.size(); ++d) order[d] = d;
            rng.shuffle(order);
            std::vector<std::string> parts;
            for (auto d : order)
                if (rng.bernoulli(spec.vocabulary.cue_rate)) parts.push_back(kLexicon[d][static_cast<std::size_t>(s[d] - 1)]);
            const auto fillers = rng.uniform_int(0, spec.vocabulary.max_filler_words);
            for (std::int64_t f = 0; f < fillers; ++f)
                parts.push_back(kFiller[static_cast<std::size_t>(rng.uniform_int(0, kFiller.size() - 1))]);
            if (parts.empty()) parts.push_back("okay");
            std::string text;
            for (std::size_t k = 0; k < parts.size(); ++k) text += (k ? ", " : "") + parts[k];
            inst.text = text;

            OutcomeLabels labels;
            std::array<double, 4> fixed{};
            for (auto o : kOutcomes) {
                const auto& m = spec.outcomes[static_cast<std::size_t>(o)];
                double eta = m.intercept;
                for (std::size_t d = 0; d < kSyntheticDimensions; ++d) eta += m.slopes[d] * s[d];
                fixed[static_cast<std::size_t>(o)] = eta;
                labels[o] = rng.bernoulli(sigmoid(eta + u[static_cast<std::size_t>(o)])) ? 1 : 0;
            }
            inst.outcomes = labels;
            ids.push_back(inst.id);
            cases.push_back(case_id);
            scores.push_back(s);
            out.true_log_odds.push_back(fixed);
            out.corpus.instances.push_back(std::move(inst));
        }
    }
    out.corpus.provenance = "synthetic seed=" + std::to_string(seed);
    out.planted = ScoreMatrix(ids, cases, std::vector<std::string>(names.begin(), names.end()));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t d = 0; d < kSyntheticDimensions; ++d) out.planted.set(r, d, scores[r][d]);
    return out;
}

std::string format_synthetic_truth(const SyntheticSpec& spec, const SyntheticCorpus& data, std::uint64_t seed) {
    ordered_json j;
    j["seed"] = seed;
    j["random_intercept_sd"] = spec.random_intercept_sd;
    j["dimensions"] = synthetic_dimension_names();
    ordered_json outcomes;
    for (auto o : kOutcomes) {
        const auto oi = static_cast<std::size_t>(o);
        const auto& m = spec.outcomes[oi];
        ordered_json entry;
        entry["intercept"] = m.intercept;
        entry["slopes"] = m.slopes;
        const auto labels = data.corpus.labels(o);
        std::vector<double> score;
        for (const auto& t : data.true_log_odds) score.push_back(t[oi]);
        std::size_t pos = 0;
        for (int y : labels) pos += static_cast<std::size_t>(y);
        entry["prevalence"] = static_cast<double>(pos) / static_cast<double>(labels.size());
        if (pos > 0 && pos < labels.size()) entry["true_model_auroc"] = stats::auroc(score, labels);
        else entry["true_model_auroc"] = nullptr;
        outcomes[outcome_key(o)] = entry;
    }
    j["outcomes"] = outcomes;
    return j.dump(2) + "\n";
}

PoissonPanel generate_poisson_panel(std::span<const double> beta, double sigma, int n_cases, int per_case,
                                    std::uint64_t seed) {
    if (beta.empty()) throw std::invalid_argument("generate_poisson_panel: beta is empty");
    if (n_cases < 1 || per_case < 1 || sigma < 0.0) throw std::invalid_argument("generate_poisson_panel: bad sizes");
    const auto p = static_cast<Eigen::Index>(beta.size() - 1);
    const auto n = static_cast<Eigen::Index>(n_cases) * per_case;
    PoissonPanel out;
    out.features.resize(n, p);
    out.outcome.reserve(static_cast<std::size_t>(n));
    out.groups.reserve(static_cast<std::size_t>(n));
    Rng rng(seed, "poisson-panel");
    Eigen::Index row = 0;
    for (int c = 0; c < n_cases; ++c) {
        const double u = sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0;
        const std::string g = "case-" + std::to_string(c + 1);
        for (int i = 0; i < per_case; ++i, ++row) {
            double eta = beta[0] + u;
            for (Eigen::Index j = 0; j < p; ++j) {
                const double x = static_cast<double>(rng.uniform_int(1, 5));
                out.features(row, j) = x;
                eta += beta[static_cast<std::size_t>(j + 1)] * x;
            }
            out.outcome.push_back(static_cast<double>(rng.poisson(std::exp(eta))));
            out.groups.push_back(g);
        }
    }
    return out;
}

} // namespace rubricforge
