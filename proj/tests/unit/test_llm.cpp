#include "rubricforge/llm/cache.hpp"
#include "rubricforge/llm/client.hpp"
#include "rubricforge/llm/embedding.hpp"
#include "rubricforge/llm/mock.hpp"
#include "rubricforge/llm/openai.hpp"
#include "rubricforge/llm/parsers.hpp"
#include "rubricforge/llm/prompts.hpp"
#include "rubricforge/corpus/synthetic.hpp"
#include "rubricforge/util/errors.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <thread>

using namespace rubricforge;
using namespace rubricforge::llm;
namespace rt = rubricforge::testing;

TEST(Parsers, CriteriaRowsSkipNoise) {
    const std::string reply =
        "```\n"
        "No|Dimension Name|Definition|Score 1|Score 3|Score 5\n"
        "---|---|---|---|---|---\n"
        "1|Clarity|How clear it is|Vague|Okay|Crystal\n"
        "two|Bad|row|a|b|c\n"
        "2|Urgency|Time pressure|None|Some\n"
        "| 3 | Reflection | Prompts thought | None | Some | Strong |\n"
        "```\n";
    const auto p = parse_criteria_rows(reply);
    ASSERT_EQ(p.rows.size(), 2u);
    EXPECT_EQ(p.rows[0].name, "Clarity");
    EXPECT_EQ(p.rows[1].ordinal, 3);
    EXPECT_EQ(p.rows[1].anchor5, "Strong");
    ASSERT_EQ(p.skipped.size(), 2u);
    EXPECT_EQ(p.skipped[0].line, 5u);
    EXPECT_THROW(parse_criteria_rows("nothing useful here"), ParseError);
}

TEST(Parsers, ConsolidatedTupleQuoting) {
    const auto t = parse_consolidated_tuple(R"((1, "Actionability", "Says \"what\" to do"))");
    EXPECT_EQ(t.ordinal, 1);
    EXPECT_EQ(t.name, "Actionability");
    EXPECT_EQ(t.definition, "Says \"what\" to do");
    const auto s = parse_consolidated_tuple("Sure:\n(2, 'Urgency', 'Time pressure')");
    EXPECT_EQ(s.name, "Urgency");
    EXPECT_THROW(parse_consolidated_tuple("(1, \"A\")"), ParseError);
    EXPECT_THROW(parse_consolidated_tuple("(1, \"A\", \"B\")(2, \"C\", \"D\")"), ParseError);
}

TEST(Parsers, ScoreList) {
    EXPECT_EQ(parse_score_list("[3, 4, 5].", 3), (std::vector<int>{3, 4, 5}));
    EXPECT_EQ(parse_score_list("1 2\n3", 3), (std::vector<int>{1, 2, 3}));
    EXPECT_THROW(parse_score_list("3, 4", 3), ParseError);
    EXPECT_THROW(parse_score_list("3, 6, 1", 3), ParseError);
    EXPECT_THROW(parse_score_list("3, x, 1", 3), ParseError);
    try {
        parse_score_list("garbage", 2);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.raw(), "garbage");
    }
}

TEST(Parsers, QuotedStringHelpers) {
    EXPECT_EQ(extract_quoted_strings(R"(Name: "A \"b\"", Definition: "c")"), (std::vector<std::string>{"A \"b\"", "c"}));
    EXPECT_EQ(unescape_quoted(escape_quoted("a\"b\\c\nd")), "a\"b\\c\nd");
    EXPECT_EQ(strip_code_fences("```json\nx\n```"), "x\n");
}

TEST(Prompts, DiscoveryCarriesOutcomeDefinitions) {
    const auto outcomes = default_outcome_definitions();
    ASSERT_EQ(outcomes.size(), 3u);
    EXPECT_EQ(outcomes[0].label, "Trainee Behavior Change");
    EXPECT_EQ(outcomes[1].label, "Trainee Verbal Acknowledgment");
    EXPECT_EQ(outcomes[2].label, "Trainer Approval");
    const auto msgs = render_discovery_prompt(outcomes, {"first\nexample", "second"});
    EXPECT_EQ(classify_prompt(msgs), PromptKind::Discovery);
    for (const auto& o : outcomes) EXPECT_NE(msgs[0].content.find(o.label), std::string::npos);
    EXPECT_NE(msgs[1].content.find("- first example"), std::string::npos);
}

TEST(Prompts, ConsolidationDemandsOneCriterion) {
    const auto msgs = render_consolidation_prompt({{"Clarity", "Says \"what\""}});
    EXPECT_EQ(classify_prompt(msgs), PromptKind::Consolidation);
    std::string all;
    for (const auto& m : msgs) all += m.content;
    EXPECT_NE(all.find("exactly one"), std::string::npos);
    EXPECT_NE(all.find("Name: \"Clarity\""), std::string::npos);
    EXPECT_NE(all.find("Says \\\"what\\\""), std::string::npos);
}

TEST(Prompts, ScoringListsEveryDimension) {
    const auto rubric = rt::simple_rubric({"A", "B", "C", "D", "E", "F"});
    const auto msgs = render_scoring_prompt(rubric, "Say \"hi\"");
    EXPECT_EQ(classify_prompt(msgs), PromptKind::Scoring);
    for (int q = 1; q <= 6; ++q) EXPECT_NE(msgs[0].content.find("Q" + std::to_string(q) + "."), std::string::npos);
    EXPECT_NE(msgs[1].content.find("FEEDBACK: \"Say \\\"hi\\\"\""), std::string::npos);
}

TEST(Cache, KeysDependOnEveryRequestField) {
    CompletionRequest r;
    r.model_id = "m";
    r.messages = {{Role::User, "hello"}};
    const auto base = cache_key("b", r);
    EXPECT_EQ(base, cache_key("b", r));
    auto t = r;
    t.replicate_tag = "run2";
    EXPECT_NE(cache_key("b", t), base);
    t = r;
    t.temperature = 1.0;
    EXPECT_NE(cache_key("b", t), base);
    EXPECT_NE(cache_key("other", r), base);
    t = r;
    t.replicate_tag = "run2";
    EXPECT_EQ(prompt_fingerprint(t.messages), prompt_fingerprint(r.messages));
}

TEST(Cache, DiskEntriesSurviveReopen) {
    rt::TempDir dir;
    CompletionRequest r;
    r.messages = {{Role::User, "q"}};
    const auto key = cache_key("b", r);
    {
        ResponseCache cache(dir.path());
        cache.put(key, canonical_request_json("b", r), rt::reply("answer"));
    }
    ResponseCache reopened(dir.path());
    ASSERT_TRUE(reopened.contains(key));
    EXPECT_EQ(reopened.get(key)->text, "answer");
    EXPECT_TRUE(std::filesystem::exists(reopened.path_for(key)));
    EXPECT_EQ(reopened.path_for(key).parent_path().filename().string(), key.substr(0, 2));
}

TEST(Client, RetriesTransportErrorsThenCaches) {
    rt::FunctionBackend backend("flaky", [](const CompletionRequest&, std::size_t call) {
        if (call < 2) throw TransportError("503", 503);
        return rt::reply("ok");
    });
    std::vector<double> sleeps;
    RetryPolicy policy;
    policy.sleep = [&](double s) { sleeps.push_back(s); };
    ResponseCache cache;
    LlmClient client(backend, &cache, policy);
    CompletionRequest r;
    r.messages = {{Role::User, "q"}};
    EXPECT_EQ(client.complete(r).text, "ok");
    EXPECT_EQ(backend.calls(), 3u);
    ASSERT_EQ(sleeps.size(), 2u);
    EXPECT_GT(sleeps[1], sleeps[0]);
    const auto again = client.complete(r);
    EXPECT_TRUE(again.from_cache);
    EXPECT_EQ(backend.calls(), 3u);
    EXPECT_EQ(client.cache_hits(), 1u);
    EXPECT_EQ(client.keys_used().size(), 1u);
}

TEST(Client, GivesUpAfterMaxAttempts) {
    rt::FunctionBackend backend("down", [](const CompletionRequest&, std::size_t) -> CompletionResponse {
        throw TransportError("connection refused");
    });
    RetryPolicy policy;
    policy.max_attempts = 3;
    policy.sleep = [](double) {};
    LlmClient client(backend, nullptr, policy);
    CompletionRequest r;
    r.messages = {{Role::User, "q"}};
    EXPECT_THROW(client.complete(r), TransportError);
    EXPECT_EQ(backend.calls(), 3u);
}

TEST(Client, NonRetryableErrorsPropagateImmediately) {
    rt::FunctionBackend backend("bad", [](const CompletionRequest&, std::size_t) -> CompletionResponse {
        throw ProtocolError("not json");
    });
    RetryPolicy policy;
    policy.sleep = [](double) {};
    LlmClient client(backend, nullptr, policy);
    CompletionRequest r;
    r.messages = {{Role::User, "q"}};
    EXPECT_THROW(client.complete(r), ProtocolError);
    EXPECT_EQ(backend.calls(), 1u);
}

TEST(Client, InvalidRequestRejected) {
    CompletionRequest r;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r.messages = {{Role::User, "q"}};
    r.temperature = 2.5;
    EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(Mock, ScoresFollowPlantedCues) {
    const auto data = generate_synthetic_corpus(rt::small_spec(2, 10), 1);
    MockOptions o;
    o.candidate_noise = 0.0;
    MockCompletionBackend mock(o);
    const auto rubric = rt::simple_rubric({"Encouragement", "Urgency", "Actionability", "Timeliness", "Clarity", "Reflection"});
    for (std::size_t i = 0; i < data.corpus.size(); ++i) {
        CompletionRequest r;
        r.messages = render_scoring_prompt(rubric, data.corpus.instances[i].text);
        const auto scores = parse_score_list(mock.complete(r).text, 6);
        for (std::size_t d = 0; d < 6; ++d) EXPECT_EQ(scores[d], data.planted.at(i, d));
    }
}

TEST(Mock, IdDependsOnOptionsButNotFailAfter) {
    MockOptions a, b;
    b.fail_after = 3;
    EXPECT_EQ(MockCompletionBackend(a).id(), MockCompletionBackend(b).id());
    b.noise_rate = 0.1;
    EXPECT_NE(MockCompletionBackend(a).id(), MockCompletionBackend(b).id());
}

TEST(Mock, FailAfterSimulatesInterruption) {
    MockOptions o;
    o.fail_after = 1;
    MockCompletionBackend mock(o);
    CompletionRequest r;
    r.messages = render_scoring_prompt(rt::simple_rubric({"Clarity"}), "text");
    EXPECT_NO_THROW(mock.complete(r));
    EXPECT_THROW(mock.complete(r), BackendError);
}

TEST(Mock, ScenarioRepliesByFingerprint) {
    CompletionRequest r;
    r.messages = render_scoring_prompt(rt::simple_rubric({"Clarity"}), "text");
    MockCompletionBackend mock({}, {{prompt_fingerprint(r.messages), "scripted"}});
    EXPECT_EQ(mock.complete(r).text, "scripted");
}

TEST(Embedding, HashVectorsAreUnitAndStable) {
    HashEmbeddingBackend backend(64);
    const auto v = embed(backend, {"alpha", "beta", "alpha"});
    double norm = 0;
    for (double x : v[0]) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-12);
    EXPECT_EQ(v[0], v[2]);
    EXPECT_DOUBLE_EQ(cosine_similarity(v[0], v[2]), 1.0);
    EXPECT_LT(std::abs(cosine_similarity(v[0], v[1])), 0.6);
    EXPECT_THROW(embed(backend, {}), std::invalid_argument);
}

TEST(Embedding, ClientMemoizesTexts) {
    HashEmbeddingBackend backend(16);
    EmbeddingClient client(backend);
    client.embed({"a", "b", "a"});
    client.embed({"b", "c"});
    EXPECT_EQ(client.backend_texts(), 3u);
}

TEST(OpenAi, BaseUrlParsing) {
    const auto u = parse_base_url("https://api.example.com/v1/");
    EXPECT_EQ(u.origin, "https://api.example.com");
    EXPECT_EQ(u.path, "/v1");
    EXPECT_EQ(parse_base_url("http://localhost:8080").path, "");
    EXPECT_THROW(parse_base_url("api.example.com/v1"), ConfigError);
}

namespace {

class LocalServer {
public:
    LocalServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST(OpenAi, ChatCompletionRoundTrip) {
    LocalServer local;
    nlohmann::json seen;
    std::string auth;
    int hits = 0;
    local.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (hits++ == 0) {
            res.status = 429;
            return;
        }
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"3, 4"}}],"usage":{"prompt_tokens":7,"completion_tokens":2}})",
                        "application/json");
    });
    OpenAiSettings s;
    s.base_url = local.base();
    s.api_key = "secret";
    s.timeout_seconds = 5;
    OpenAiBackend backend(s);
    CompletionRequest r;
    r.model_id = "gpt-4o";
    r.temperature = 0.0;
    r.messages = {{Role::System, "sys"}, {Role::User, "user"}};
    r.replicate_tag = "run2";
    EXPECT_THROW(backend.complete(r), TransportError);
    const auto resp = backend.complete(r);
    EXPECT_EQ(resp.text, "3, 4");
    ASSERT_TRUE(resp.usage.has_value());
    EXPECT_EQ(resp.usage->prompt_tokens, 7);
    EXPECT_EQ(seen["model"], "gpt-4o");
    EXPECT_EQ(seen["temperature"], 0.0);
    EXPECT_EQ(seen["messages"][0]["role"], "system");
    EXPECT_FALSE(seen.contains("replicate_tag"));
    EXPECT_EQ(auth, "Bearer secret");
}

TEST(OpenAi, ErrorMapping) {
    LocalServer local;
    local.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (req.body.find("bad-request") != std::string::npos) {
            res.status = 400;
            res.set_content(R"({"error":{"message":"nope"}})", "application/json");
        } else {
            res.set_content("not json", "text/plain");
        }
    });
    OpenAiSettings s;
    s.base_url = local.base();
    OpenAiBackend backend(s);
    CompletionRequest r;
    r.messages = {{Role::User, "bad-request"}};
    try {
        backend.complete(r);
        FAIL();
    } catch (const TransportError&) {
        FAIL() << "400 must not be retryable";
    } catch (const BackendError&) {
    }
    r.messages = {{Role::User, "other"}};
    EXPECT_THROW(backend.complete(r), ProtocolError);
    OpenAiSettings dead;
    dead.base_url = "http://127.0.0.1:1/v1";
    dead.timeout_seconds = 2;
    EXPECT_THROW(OpenAiBackend(dead).complete(r), TransportError);
}

TEST(OpenAi, Embeddings) {
    LocalServer local;
    local.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json out;
        out["data"] = nlohmann::json::array();
        for (std::size_t i = 0; i < body["input"].size(); ++i)
            out["data"].push_back({{"index", i}, {"embedding", {3.0 * static_cast<double>(i + 1), 4.0}}});
        res.set_content(out.dump(), "application/json");
    });
    OpenAiSettings s;
    s.base_url = local.base();
    OpenAiEmbeddingBackend backend(s);
    const auto v = embed(backend, {"x", "y"});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NEAR(v[0][0], 0.6, 1e-12);
    EXPECT_EQ(backend.dimension(), 2u);
}
