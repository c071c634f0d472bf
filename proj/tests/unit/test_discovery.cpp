#include "rubricforge/discovery/discovery.hpp"
#include "rubricforge/llm/mock.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace rubricforge;
namespace rt = rubricforge::testing;

namespace {

discovery::DiscoveryOptions small_options() {
    discovery::DiscoveryOptions o;
    o.subset_size = 20;
    o.seed = 11;
    return o;
}

} // namespace

TEST(Discovery, DefaultsFollowTheMethod) {
    const discovery::DiscoveryOptions o;
    EXPECT_EQ(o.n_agents, 5);
    EXPECT_EQ(o.subset_size, 50u);
    EXPECT_DOUBLE_EQ(o.temperature, 1.0);
    EXPECT_EQ(o.outcomes.size(), 3u);
}

TEST(Discovery, InvalidOptionsRejected) {
    auto o = small_options();
    o.n_agents = 0;
    EXPECT_THROW(o.validate(), ConfigError);
    o = small_options();
    o.subset_size = 0;
    EXPECT_THROW(o.validate(), ConfigError);
}

TEST(Discovery, MockRunGivesCriteriaPerAgent) {
    const auto corpus = rt::small_corpus(4, 10);
    llm::MockCompletionBackend mock;
    llm::ResponseCache cache;
    llm::LlmClient client(mock, &cache);
    const auto result = discovery::run_discovery(client, corpus, small_options());
    ASSERT_EQ(result.runs.size(), 5u);
    std::set<std::vector<std::string>> subsets;
    for (std::size_t a = 0; a < 5; ++a) {
        const auto& run = result.runs[a];
        EXPECT_EQ(run.agent_id, static_cast<int>(a + 1));
        EXPECT_TRUE(run.ok());
        EXPECT_EQ(run.subset_ids.size(), 20u);
        EXPECT_GE(run.criteria.size(), 6u);
        for (const auto& c : run.criteria) EXPECT_EQ(c.agent_id, run.agent_id);
        subsets.insert(run.subset_ids);
    }
    EXPECT_EQ(subsets.size(), 5u);
    EXPECT_EQ(mock.calls(), 5u);
    std::size_t total = 0;
    for (const auto& r : result.runs) total += r.criteria.size();
    EXPECT_EQ(result.criteria().size(), total);
}

TEST(Discovery, DeterministicAndCached) {
    const auto corpus = rt::small_corpus(4, 10);
    llm::MockCompletionBackend mock;
    llm::ResponseCache cache;
    llm::LlmClient client(mock, &cache);
    const auto a = discovery::run_discovery(client, corpus, small_options());
    const auto b = discovery::run_discovery(client, corpus, small_options());
    EXPECT_EQ(discovery::format_discovery_json(a), discovery::format_discovery_json(b));
    EXPECT_EQ(mock.calls(), 5u);
    EXPECT_EQ(client.cache_hits(), 5u);
}

TEST(Discovery, RequestsUseDiscoveryTemperature) {
    const auto corpus = rt::small_corpus(4, 10);
    std::set<double> temps;
    std::mutex m;
    llm::MockCompletionBackend mock;
    rt::FunctionBackend spy("spy", [&](const llm::CompletionRequest& r, std::size_t) {
        std::lock_guard lock(m);
        temps.insert(r.temperature);
        return mock.complete(r);
    });
    llm::LlmClient client(spy, nullptr);
    discovery::run_discovery(client, corpus, small_options());
    EXPECT_EQ(temps, (std::set<double>{1.0}));
}

TEST(Discovery, JsonRoundTrip) {
    const auto corpus = rt::small_corpus(4, 10);
    llm::MockCompletionBackend mock;
    llm::LlmClient client(mock, nullptr);
    const auto result = discovery::run_discovery(client, corpus, small_options());
    rt::TempDir dir;
    discovery::write_discovery(dir / "discovery.json", result);
    const auto back = discovery::read_discovery(dir / "discovery.json");
    EXPECT_EQ(back.criteria(), result.criteria());
    EXPECT_EQ(discovery::format_discovery_json(back), discovery::format_discovery_json(result));
    EXPECT_THROW(discovery::parse_discovery_json("{\"runs\": 3}"), DataError);
}

TEST(Discovery, FailingAgentKeepsPartialResults) {
    const auto corpus = rt::small_corpus(4, 10);
    llm::MockCompletionBackend mock;
    rt::FunctionBackend backend("partial", [&](const llm::CompletionRequest& r, std::size_t call) {
        if (call == 2) return rt::reply("I cannot help with that.");
        return mock.complete(r);
    });
    llm::LlmClient client(backend, nullptr);
    auto o = small_options();
    o.concurrency = 1;
    try {
        discovery::run_discovery(client, corpus, o);
        FAIL();
    } catch (const discovery::DiscoveryError& e) {
        const auto& runs = e.partial().runs;
        ASSERT_EQ(runs.size(), 5u);
        for (std::size_t a = 0; a < 5; ++a) EXPECT_EQ(runs[a].ok(), a != 2) << a;
        EXPECT_EQ(runs[2].raw, "I cannot help with that.");
        EXPECT_FALSE(runs[0].criteria.empty());
    }
}

TEST(Discovery, ExtraRowsDroppedAndMalformedReported) {
    const auto corpus = rt::small_corpus(4, 10);
    std::string many;
    for (int i = 1; i <= 15; ++i)
        many += std::to_string(i) + "|Criterion " + std::to_string(i) + "|Def|a|b|c\n";
    many += "16|broken row\n";
    rt::FunctionBackend backend("rows", [&](const llm::CompletionRequest&, std::size_t) { return rt::reply(many); });
    llm::LlmClient client(backend, nullptr);
    const auto result = discovery::run_discovery(client, corpus, small_options());
    for (const auto& run : result.runs) {
        EXPECT_EQ(run.criteria.size(), 12u);
        EXPECT_EQ(run.dropped, 3u);
        EXPECT_EQ(run.skipped.size(), 1u);
    }
}

TEST(Discovery, CorpusSmallerThanSubsetRejected) {
    const auto corpus = rt::small_corpus(1, 10);
    llm::MockCompletionBackend mock;
    llm::LlmClient client(mock, nullptr);
    EXPECT_THROW(discovery::run_discovery(client, corpus, small_options()), DataError);
    EXPECT_EQ(mock.calls(), 0u);
}
