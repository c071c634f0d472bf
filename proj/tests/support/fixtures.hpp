#pragma once

#include "rubricforge/corpus/corpus.hpp"
#include "rubricforge/corpus/score_matrix.hpp"
#include "rubricforge/corpus/synthetic.hpp"
#include "rubricforge/llm/backend.hpp"
#include "rubricforge/rubric/rubric.hpp"
#include "rubricforge/util/rng.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <unistd.h>
#include <string>
#include <vector>

namespace rubricforge::testing {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& label = "rf") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                (label + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline SyntheticSpec small_spec(int n_cases = 10, int per_case = 10) {
    SyntheticSpec spec;
    spec.n_cases = n_cases;
    spec.instances_per_case = per_case;
    spec.outcomes[0] = {-2.4, {0.6, -0.4, 0.45, 0.35, 0.1, -0.3}};
    spec.outcomes[1] = {-1.0, {0.2, 0.1, 0.0, 0.3, 0.0, 0.0}};
    spec.outcomes[2] = {-1.5, {0.3, 0.0, 0.0, 0.0, 0.2, 0.0}};
    spec.outcomes[3] = {-2.0, {0.0, 0.3, 0.0, 0.0, 0.0, 0.2}};
    return spec;
}

inline Corpus small_corpus(int n_cases = 10, int per_case = 10, std::uint64_t seed = 1) {
    return generate_synthetic_corpus(small_spec(n_cases, per_case), seed).corpus;
}

// Candidate criteria in planted correlation groups: every member of a group
// copies a latent 1..5 score and shifts it by one level with probability
// `noise`. Criteria are dealt to agents round-robin with varied counts.
struct PlantedCandidates {
    ScoreMatrix scores;
    std::vector<CandidateCriterion> criteria;
    std::vector<int> group;  // planted group per criterion
};

inline PlantedCandidates planted_candidates(int groups, const std::vector<int>& members_per_group,
                                            std::size_t n_instances, double noise, std::uint64_t seed,
                                            int agents = 5) {
    PlantedCandidates out;
    Rng rng(seed, "planted-candidates");
    std::vector<std::vector<int>> latent(static_cast<std::size_t>(groups), std::vector<int>(n_instances));
    for (auto& g : latent)
        for (auto& v : g) v = static_cast<int>(rng.uniform_int(1, 5));
    std::vector<int> next_ordinal(static_cast<std::size_t>(agents) + 1, 1);
    int agent = 1;
    std::vector<std::string> ids, cases, refs;
    for (std::size_t i = 0; i < n_instances; ++i) {
        ids.push_back("fb-" + std::to_string(i + 1));
        cases.push_back("case-" + std::to_string(i / 10 + 1));
    }
    for (int g = 0; g < groups; ++g)
        for (int m = 0; m < members_per_group[static_cast<std::size_t>(g)]; ++m) {
            CandidateCriterion c;
            c.agent_id = agent;
            c.ordinal = next_ordinal[static_cast<std::size_t>(agent)]++;
            c.name = "Concept " + std::to_string(g + 1) + " variant " + std::to_string(m + 1);
            c.definition = "Definition of concept " + std::to_string(g + 1);
            c.anchors = {"low", "mid", "high"};
            out.criteria.push_back(c);
            out.group.push_back(g);
            refs.push_back(c.ref());
            agent = agent % agents + 1;
        }
    out.scores = ScoreMatrix(ids, cases, refs);
    for (std::size_t c = 0; c < out.criteria.size(); ++c)
        for (std::size_t i = 0; i < n_instances; ++i) {
            int v = latent[static_cast<std::size_t>(out.group[c])][i];
            if (rng.bernoulli(noise)) {
                v += rng.bernoulli(0.5) ? 1 : -1;
                if (v < 1) v = 2;
                if (v > 5) v = 4;
            }
            out.scores.set(i, c, v);
        }
    return out;
}

// Backend that answers through a callable, for scripted failures.
class FunctionBackend : public llm::CompletionBackend {
public:
    using Fn = std::function<llm::CompletionResponse(const llm::CompletionRequest&, std::size_t call)>;
    FunctionBackend(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}
    std::string id() const override { return id_; }
    llm::CompletionResponse complete(const llm::CompletionRequest& request) override {
        const std::size_t n = calls_++;
        return fn_(request, n);
    }
    std::size_t calls() const { return calls_.load(); }

private:
    std::string id_;
    Fn fn_;
    std::atomic<std::size_t> calls_{0};
};

inline llm::CompletionResponse reply(const std::string& text) {
    llm::CompletionResponse r;
    r.text = text;
    return r;
}

inline Rubric simple_rubric(const std::vector<std::string>& names) {
    Rubric r;
    for (const auto& n : names) {
        RubricDimension d;
        d.name = n;
        d.definition = "How well the feedback shows " + n;
        d.anchors[0].description = "No " + n;
        d.anchors[1].description = "Some " + n;
        d.anchors[2].description = "Strong " + n;
        r.dimensions.push_back(d);
    }
    return r;
}

} // namespace rubricforge::testing
