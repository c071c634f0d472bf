#include "rubricforge/judge/judge.hpp"

#include "rubricforge/llm/parsers.hpp"
#include "rubricforge/llm/prompts.hpp"
#include "rubricforge/util/parallel.hpp"
#include "rubricforge/util/rng.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace rubricforge::judge {

void JudgeOptions::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ConfigError("scoring temperature must lie in [0, 2]");
    if (max_reprompts < 0) throw ConfigError("max_reprompts must be nonnegative");
    if (concurrency == 0) throw ConfigError("scoring concurrency must be positive");
    if (!(failure_cap >= 0.0 && failure_cap <= 1.0)) throw ConfigError("failure cap must lie in [0, 1]");
}

std::vector<int> score_instance(llm::LlmClient& client, const Rubric& rubric, const FeedbackInstance& instance,
                                const std::string& replicate_tag, const JudgeOptions& options) {
    if (rubric.size() == 0) throw std::invalid_argument("score_instance: empty rubric");
    llm::CompletionRequest req;
    req.model_id = options.model_id;
    req.temperature = options.temperature;
    req.messages = llm::render_scoring_prompt(rubric, instance.text);
    req.replicate_tag = replicate_tag;
    std::string last_raw;
    std::string last_error;
    for (int attempt = 0; attempt <= options.max_reprompts; ++attempt) {
        if (attempt > 0) req.messages.push_back(llm::scoring_format_reminder(rubric.size()));
        const auto resp = client.complete(req);
        try {
            return llm::parse_score_list(resp.text, rubric.size());
        } catch (const ParseError& e) {
            last_raw = resp.text;
            last_error = e.what();
        }
    }
    throw ScoringError(instance.id, "instance " + instance.id + ": unparseable score reply: " + last_error, last_raw);
}

ScoringRun score_corpus(llm::LlmClient& client, const Rubric& rubric, const Corpus& corpus,
                        const std::string& replicate_tag, const JudgeOptions& options, const ProgressFn& progress) {
    if (corpus.size() == 0) throw std::invalid_argument("score_corpus: empty corpus");
    if (rubric.size() == 0) throw std::invalid_argument("score_corpus: empty rubric");
    options.validate();
    std::vector<std::string> ids, cases;
    for (const auto& inst : corpus.instances) {
        ids.push_back(inst.id);
        cases.push_back(inst.case_id);
    }
    ScoringRun run{ScoreMatrix(ids, cases, rubric.names()), {}, replicate_tag};
    std::vector<std::optional<ScoringFailure>> failures(corpus.size());
    std::mutex mutex;
    std::atomic<std::size_t> done{0};
    parallel_for(corpus.size(), options.concurrency, [&](std::size_t i) {
        const auto& inst = corpus.instances[i];
        std::optional<std::vector<int>> scores;
        try {
            scores = score_instance(client, rubric, inst, replicate_tag, options);
        } catch (const ScoringError& e) {
            failures[i] = ScoringFailure{inst.id, e.what(), e.raw()};
        }
        {
            std::lock_guard lock(mutex);
            if (scores)
                for (std::size_t c = 0; c < scores->size(); ++c) run.scores.set(i, c, (*scores)[c]);
        }
        const std::size_t d = ++done;
        if (progress) {
            std::lock_guard lock(mutex);
            progress(d, corpus.size());
        }
    });
    for (auto& f : failures)
        if (f) run.failures.push_back(std::move(*f));
    const double fraction = static_cast<double>(run.failures.size()) / static_cast<double>(corpus.size());
    if (fraction > options.failure_cap)
        throw DataError(std::to_string(run.failures.size()) + " of " + std::to_string(corpus.size()) +
                        " instances failed to score, above the " + std::to_string(options.failure_cap * 100.0) +
                        "% cap; first failure: " + run.failures.front().message);
    return run;
}

std::vector<DimensionAgreement> matrix_agreement(const ScoreMatrix& a, const ScoreMatrix& b, std::size_t replicates,
                                                 std::uint64_t seed) {
    std::unordered_map<std::string, std::size_t> b_rows;
    for (std::size_t r = 0; r < b.rows(); ++r) b_rows.emplace(b.instance_ids()[r], r);
    std::vector<DimensionAgreement> out;
    for (std::size_t ca = 0; ca < a.cols(); ++ca) {
        const auto& dim = a.dimension_ids()[ca];
        const auto cb = b.column_of(dim);
        if (!cb) continue;
        std::vector<int> r1, r2;
        for (std::size_t ra = 0; ra < a.rows(); ++ra) {
            const auto it = b_rows.find(a.instance_ids()[ra]);
            if (it == b_rows.end() || a.missing(ra, ca) || b.missing(it->second, *cb)) continue;
            r1.push_back(a.at(ra, ca));
            r2.push_back(b.at(it->second, *cb));
        }
        if (r1.empty()) throw DataError("no jointly scored instances for dimension " + dim);
        out.push_back({dim, stats::bootstrap_kappa_ci(r1, r2, 5, replicates, derive_seed(seed, "agreement", ca))});
    }
    if (out.empty()) throw DataError("score matrices share no dimensions");
    return out;
}

std::vector<DimensionAgreement> repeat_agreement(llm::LlmClient& client, const Rubric& rubric, const Corpus& corpus,
                                                 const JudgeOptions& options, std::size_t replicates,
                                                 std::uint64_t seed) {
    const auto run1 = score_corpus(client, rubric, corpus, "run1", options);
    const auto run2 = score_corpus(client, rubric, corpus, "run2", options);
    return matrix_agreement(run1.scores, run2.scores, replicates, seed);
}

} // namespace rubricforge::judge
