#include "rubricforge/judge/judge.hpp"
#include "rubricforge/llm/mock.hpp"
#include "rubricforge/llm/parsers.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace rubricforge;
namespace rt = rubricforge::testing;

namespace {

Corpus numbered_corpus(std::size_t n) {
    Corpus c;
    for (std::size_t i = 0; i < n; ++i)
        c.instances.push_back({"fb-" + std::to_string(i), "case-" + std::to_string(i / 10), "line " + std::to_string(i), {}, {}});
    return c;
}

bool mentions(const llm::CompletionRequest& r, const std::set<std::string>& texts) {
    for (const auto& t : texts)
        if (r.messages[1].content == "FEEDBACK: \"" + t + "\"") return true;
    return false;
}

} // namespace

TEST(Judge, DefaultsFollowTheMethod) {
    const judge::JudgeOptions o;
    EXPECT_DOUBLE_EQ(o.temperature, 0.0);
    EXPECT_EQ(o.max_reprompts, 1);
    EXPECT_DOUBLE_EQ(o.failure_cap, 0.02);
}

TEST(Judge, RepromptsWithFormatReminder) {
    const auto rubric = rt::simple_rubric({"A", "B"});
    std::vector<std::size_t> sizes;
    rt::FunctionBackend backend("b", [&](const llm::CompletionRequest& r, std::size_t call) {
        sizes.push_back(r.messages.size());
        return rt::reply(call == 0 ? "A is good" : "4, 2");
    });
    llm::LlmClient client(backend, nullptr);
    const auto scores = judge::score_instance(client, rubric, {"x", "c", "text", {}, {}}, "run1");
    EXPECT_EQ(scores, (std::vector<int>{4, 2}));
    EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 3}));
}

TEST(Judge, UnparseableAfterRepromptsThrows) {
    const auto rubric = rt::simple_rubric({"A", "B"});
    rt::FunctionBackend backend("b", [](const llm::CompletionRequest&, std::size_t) { return rt::reply("7, 7"); });
    llm::LlmClient client(backend, nullptr);
    try {
        judge::score_instance(client, rubric, {"x", "c", "text", {}, {}}, "run1");
        FAIL();
    } catch (const judge::ScoringError& e) {
        EXPECT_EQ(e.instance_id(), "x");
        EXPECT_EQ(e.raw(), "7, 7");
    }
    EXPECT_EQ(backend.calls(), 2u);
}

TEST(Judge, FailuresMaskedUnderCap) {
    const auto corpus = numbered_corpus(100);
    const auto rubric = rt::simple_rubric({"A", "B", "C"});
    rt::FunctionBackend backend("b", [&](const llm::CompletionRequest& r, std::size_t) {
        return rt::reply(mentions(r, {"line 17", "line 42"}) ? "no" : "1, 3, 5");
    });
    llm::LlmClient client(backend, nullptr);
    const auto run = judge::score_corpus(client, rubric, corpus, "run1");
    ASSERT_EQ(run.failures.size(), 2u);
    EXPECT_EQ(run.failures[0].instance_id, "fb-17");
    EXPECT_EQ(run.failures[1].instance_id, "fb-42");
    EXPECT_TRUE(run.scores.missing(17, 0));
    EXPECT_FALSE(run.scores.row_complete(42));
    EXPECT_EQ(run.scores.missing_count(), 6u);
    EXPECT_EQ(run.scores.at(0, 2), 5);
    EXPECT_EQ(run.scores.dimension_ids(), rubric.names());
}

TEST(Judge, FailuresOverCapAbort) {
    const auto corpus = numbered_corpus(100);
    const auto rubric = rt::simple_rubric({"A"});
    rt::FunctionBackend backend("b", [&](const llm::CompletionRequest& r, std::size_t) {
        return rt::reply(mentions(r, {"line 1", "line 2", "line 3"}) ? "no" : "2");
    });
    llm::LlmClient client(backend, nullptr);
    EXPECT_THROW(judge::score_corpus(client, rubric, corpus, "run1"), DataError);
}

TEST(Judge, BackendErrorsAbort) {
    const auto corpus = numbered_corpus(10);
    rt::FunctionBackend backend("b", [](const llm::CompletionRequest&, std::size_t) -> llm::CompletionResponse {
        throw llm::ProtocolError("bad payload");
    });
    llm::LlmClient client(backend, nullptr);
    EXPECT_THROW(judge::score_corpus(client, rt::simple_rubric({"A"}), corpus, "run1"), BackendError);
}

TEST(Judge, ProgressReachesTotal) {
    const auto corpus = numbered_corpus(30);
    rt::FunctionBackend backend("b", [](const llm::CompletionRequest&, std::size_t) { return rt::reply("3"); });
    llm::LlmClient client(backend, nullptr);
    std::size_t last = 0, total = 0;
    judge::score_corpus(client, rt::simple_rubric({"A"}), corpus, "run1", {},
                        [&](std::size_t d, std::size_t t) {
                            last = std::max(last, d);
                            total = t;
                        });
    EXPECT_EQ(last, 30u);
    EXPECT_EQ(total, 30u);
}

TEST(Agreement, IdenticalRunsGiveKappaOne) {
    const auto corpus = rt::small_corpus(4, 10);
    llm::MockCompletionBackend mock;
    llm::ResponseCache cache;
    llm::LlmClient client(mock, &cache);
    const auto rubric = rt::simple_rubric({"Encouragement", "Urgency", "Clarity"});
    const auto agreement = judge::repeat_agreement(client, rubric, corpus, {}, 200, 1);
    ASSERT_EQ(agreement.size(), 3u);
    for (const auto& a : agreement) {
        EXPECT_DOUBLE_EQ(a.estimate.kappa, 1.0);
        EXPECT_EQ(a.estimate.n_items, corpus.size());
    }
    EXPECT_EQ(mock.calls(), 2 * corpus.size());
}

TEST(Agreement, MatchesBruteKappaUnderTagNoise) {
    const auto corpus = rt::small_corpus(10, 10);
    llm::MockOptions o;
    o.noise_tag = "run2";
    o.noise_rate = 0.2;
    llm::MockCompletionBackend mock(o);
    llm::LlmClient client(mock, nullptr);
    const auto rubric = rt::simple_rubric({"Encouragement", "Urgency"});
    const auto run1 = judge::score_corpus(client, rubric, corpus, "run1");
    const auto run2 = judge::score_corpus(client, rubric, corpus, "run2");
    EXPECT_NE(run1.scores, run2.scores);
    const auto agreement = judge::matrix_agreement(run1.scores, run2.scores, 500, 3);
    for (std::size_t d = 0; d < 2; ++d) {
        const double brute = rt::brute_weighted_kappa(run1.scores.column(d), run2.scores.column(d), 5);
        EXPECT_NEAR(agreement[d].estimate.kappa, brute, 1e-10);
        EXPECT_LE(agreement[d].estimate.ci_low, agreement[d].estimate.kappa);
        EXPECT_GE(agreement[d].estimate.ci_high, agreement[d].estimate.kappa);
        EXPECT_LT(agreement[d].estimate.kappa, 1.0);
    }
}

TEST(Agreement, MatchesRowsById) {
    ScoreMatrix a({"x", "y", "z"}, {"c", "c", "c"}, {"A"});
    ScoreMatrix b({"z", "y", "x"}, {"c", "c", "c"}, {"A"});
    const int va[] = {1, 3, 5};
    for (std::size_t r = 0; r < 3; ++r) {
        a.set(r, 0, va[r]);
        b.set(2 - r, 0, va[r]);
    }
    const auto agreement = judge::matrix_agreement(a, b, 100, 1);
    EXPECT_DOUBLE_EQ(agreement[0].estimate.kappa, 1.0);
    EXPECT_EQ(agreement[0].estimate.n_items, 3u);
}
