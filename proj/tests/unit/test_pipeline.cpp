#include "rubricforge/discovery/discovery.hpp"
#include "rubricforge/pipeline/commands.hpp"
#include "rubricforge/pipeline/config.hpp"
#include "rubricforge/pipeline/manifest.hpp"
#include "rubricforge/util/csv.hpp"
#include "rubricforge/util/io.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace rubricforge;
using namespace rubricforge::pipeline;
namespace rt = rubricforge::testing;

namespace {

PipelineConfig test_config(const rt::TempDir& dir) {
    PipelineConfig c;
    c.run.cache_dir = (dir / "cache").string();
    c.run.output_dir = (dir / "out").string();
    c.run.progress = false;
    c.run.concurrency = 4;
    c.discovery.subset_size = 20;
    c.evaluation.model = "logistic";
    c.evaluation.outer_k = 3;
    c.evaluation.inner_k = 3;
    c.agreement.bootstrap_replicates = 200;
    return c;
}

fs::path write_corpus_file(const rt::TempDir& dir, int n_cases = 6, int per_case = 10) {
    const auto path = dir / "corpus.jsonl";
    write_corpus(path, rt::small_corpus(n_cases, per_case));
    return path;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::set<std::string> all_cache_keys(const fs::path& manifest) {
    std::set<std::string> out;
    for (const auto& [stage, keys] : read_manifest(manifest).cache_keys) out.insert(keys.begin(), keys.end());
    return out;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
    const std::string capture = fs::temp_directory_path() / ("rf-cli-" + std::to_string(::getpid()) + ".txt");
    const std::string cmd = std::string(RUBRICFORGE_CLI) + " " + args + " >" + capture + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (out) *out = read_text_file(capture);
    fs::remove(capture);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, DefaultsFollowTheMethod) {
    const PipelineConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.discovery.n_agents, 5);
    EXPECT_EQ(c.discovery.subset_size, 50);
    EXPECT_DOUBLE_EQ(c.discovery.temperature, 1.0);
    EXPECT_DOUBLE_EQ(c.scoring.temperature, 0.0);
    EXPECT_DOUBLE_EQ(c.consolidation.temperature, 0.0);
    EXPECT_EQ(c.consolidation.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
    EXPECT_EQ(c.evaluation.inner_k, 5);
    EXPECT_EQ(c.evaluation.comparison_inner_k, 3);
    EXPECT_DOUBLE_EQ(c.stability.drift_threshold, 0.05);
    EXPECT_DOUBLE_EQ(c.stability.coverage_threshold, 0.80);
    EXPECT_EQ(c.evaluation.holdout_seeds.size(), 3u);
    EXPECT_DOUBLE_EQ(c.evaluation.holdout_test_fraction, 0.2);
    EXPECT_EQ(c.evaluation.outer_k, 5);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    PipelineConfig c;
    EXPECT_THROW(set_config_value(c, "discovery.agents", "3"), ConfigError);
    EXPECT_THROW(set_config_value(c, "discovery.n_agents", "three"), ConfigError);
    set_config_value(c, "discovery.n_agents", "0");
    EXPECT_THROW(c.validate(), ConfigError);
    c = PipelineConfig{};
    set_config_value(c, "scoring.temperature", "2.5");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, FileThenEnvironment) {
    rt::TempDir dir;
    write_file(dir / "rf.ini", "[discovery]\nn_agents = 3\nseed = 9\n[evaluation]\nholdout_seeds = 4,5\n");
    PipelineConfig c;
    apply_config_file(c, dir / "rf.ini");
    EXPECT_EQ(c.discovery.n_agents, 3);
    EXPECT_EQ(c.evaluation.holdout_seeds, (std::vector<std::uint64_t>{4, 5}));
    const std::map<std::string, std::string> env{{"RUBRICFORGE_DISCOVERY_SEED", "12"}, {"OPENAI_API_KEY", "sk-x"}};
    apply_environment(c, [&](const char* n) -> const char* {
        auto it = env.find(n);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    EXPECT_EQ(c.discovery.seed, 12u);
    EXPECT_EQ(c.backend.api_key, "sk-x");
    for (const auto& [k, v] : config_snapshot(c)) EXPECT_EQ(v.find("sk-x"), std::string::npos) << k;
    write_file(dir / "bad.ini", "[discovery]\nagents = 3\n");
    EXPECT_THROW(apply_config_file(c, dir / "bad.ini"), ConfigError);
    EXPECT_THROW(apply_config_file(c, dir / "missing.ini"), ConfigError);
}

TEST(Config, IniRoundTrip) {
    rt::TempDir dir;
    PipelineConfig c;
    set_config_value(c, "consolidation.seeds", "1,2,3");
    set_config_value(c, "backend.mock_noise_tag", "run2");
    write_file(dir / "rf.ini", format_config_ini(c));
    PipelineConfig back;
    apply_config_file(back, dir / "rf.ini");
    EXPECT_EQ(config_snapshot(back), config_snapshot(c));
    EXPECT_EQ(environment_name("run.cache_dir"), "RUBRICFORGE_RUN_CACHE_DIR");
}

TEST(Manifest, JsonRoundTrip) {
    RunManifest m;
    m.command = "score";
    m.tool_version = tool_version();
    m.config = {{"a.b", "1"}};
    m.inputs["corpus"] = {"c.jsonl", "abc"};
    m.cache_keys["scoring"] = {"k1", "k2"};
    m.subsets["1"] = {"fb-1"};
    m.counters["backend_invocations"] = "4";
    m.warnings = {"w"};
    m.started_at = utc_timestamp();
    m.finished_at = m.started_at;
    const auto back = parse_manifest_json(format_manifest_json(m));
    EXPECT_EQ(format_manifest_json(back), format_manifest_json(m));
    EXPECT_EQ(manifest_path_for("out/scores-run1.csv"), fs::path("out/scores-run1.manifest.json"));
}

TEST(HumanRatings, RoundedMeanRoundsHalvesUp) {
    EXPECT_EQ(rounded_mean({1, 2}), 2);
    EXPECT_EQ(rounded_mean({3, 4}), 4);
    EXPECT_EQ(rounded_mean({1, 1, 2}), 1);
    EXPECT_EQ(rounded_mean({1, 2, 2}), 2);
    EXPECT_EQ(rounded_mean({5}), 5);
    EXPECT_THROW(rounded_mean({}), std::invalid_argument);
}

TEST(HumanRatings, ParsingAndErrors) {
    rt::TempDir dir;
    write_file(dir / "ok.csv", "instance_id,rater_id,Clarity\nfb-1,r1,3\nfb-1,r2,4\n");
    const auto h = read_human_ratings(dir / "ok.csv");
    EXPECT_EQ(h.raters, (std::vector<std::string>{"r1", "r2"}));
    EXPECT_EQ(h.scores.at("r2").at("fb-1"), (std::vector<int>{4}));
    write_file(dir / "range.csv", "instance_id,rater_id,Clarity\nfb-1,r1,6\n");
    EXPECT_THROW(read_human_ratings(dir / "range.csv"), DataError);
    write_file(dir / "dup.csv", "instance_id,rater_id,Clarity\nfb-1,r1,3\nfb-1,r1,4\n");
    EXPECT_THROW(read_human_ratings(dir / "dup.csv"), DataError);
    write_file(dir / "cols.csv", "id,rater,Clarity\nfb-1,r1,3\n");
    EXPECT_THROW(read_human_ratings(dir / "cols.csv"), DataError);
}

TEST(Commands, MissingCorpusNamesThePath) {
    rt::TempDir dir;
    std::ostringstream log;
    try {
        cmd_discover(test_config(dir), {dir / "nope.jsonl", {}}, log);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find((dir / "nope.jsonl").string()), std::string::npos);
    }
}

TEST(Commands, InvalidConfigFailsBeforeAnyCall) {
    rt::TempDir dir;
    auto c = test_config(dir);
    c.discovery.n_agents = 0;
    std::ostringstream log;
    EXPECT_THROW(cmd_discover(c, {write_corpus_file(dir), {}}, log), ConfigError);
    EXPECT_FALSE(fs::exists(dir / "cache"));
    EXPECT_FALSE(fs::exists(dir / "out" / "discovery.json"));
}

TEST(Commands, EmptyRubricRejected) {
    rt::TempDir dir;
    write_file(dir / "rubric.json", "{\"dimensions\": []}");
    std::ostringstream log;
    EXPECT_THROW(cmd_score(test_config(dir), {dir / "rubric.json", write_corpus_file(dir), "", {}}, log), DataError);
}

TEST(Commands, ScoringResumesFromCache) {
    rt::TempDir dir;
    const auto c = test_config(dir);
    const auto corpus = write_corpus_file(dir);
    write_rubric(dir / "rubric.json", rt::simple_rubric({"Clarity", "Urgency"}));
    std::ostringstream log;
    const auto first = cmd_score(c, {dir / "rubric.json", corpus, "run1", dir / "a.csv"}, log);
    const auto second = cmd_score(c, {dir / "rubric.json", corpus, "run1", dir / "b.csv"}, log);
    EXPECT_EQ(read_manifest(first.manifest).counters.at("backend_invocations"), "60");
    EXPECT_EQ(read_manifest(second.manifest).counters.at("backend_invocations"), "0");
    EXPECT_EQ(read_manifest(second.manifest).counters.at("cache_hits"), "60");
    EXPECT_EQ(read_text_file(dir / "a.csv"), read_text_file(dir / "b.csv"));
    EXPECT_EQ(all_cache_keys(first.manifest), all_cache_keys(second.manifest));

    const auto run2 = cmd_score(c, {dir / "rubric.json", corpus, "run2", dir / "c.csv"}, log);
    EXPECT_EQ(read_manifest(run2.manifest).counters.at("backend_invocations"), "60");
    const auto k1 = all_cache_keys(first.manifest), k2 = all_cache_keys(run2.manifest);
    for (const auto& k : k2) EXPECT_EQ(k1.count(k), 0u);
}

TEST(Commands, SynthIsDeterministic) {
    rt::TempDir dir;
    const auto c = test_config(dir);
    write_file(dir / "spec.json", format_synthetic_spec(rt::small_spec(5, 10)));
    std::ostringstream log;
    cmd_synth(c, {dir / "spec.json", 7, dir / "a"}, log);
    cmd_synth(c, {dir / "spec.json", 7, dir / "b"}, log);
    cmd_synth(c, {dir / "spec.json", 8, dir / "c"}, log);
    for (const char* f : {"corpus.jsonl", "planted_scores.csv", "truth.json"})
        EXPECT_EQ(read_text_file(dir / "a" / f), read_text_file(dir / "b" / f)) << f;
    EXPECT_NE(read_text_file(dir / "a" / "corpus.jsonl"), read_text_file(dir / "c" / "corpus.jsonl"));
    EXPECT_THROW(cmd_synth(c, {dir / "missing.json", 7, dir / "d"}, log), ConfigError);
}

TEST(Commands, LabelDerivedFeaturesFlagLeakage) {
    rt::TempDir dir;
    const auto c = test_config(dir);
    const auto data = generate_synthetic_corpus(rt::small_spec(20, 10), 3);
    write_corpus(dir / "corpus.jsonl", data.corpus);
    write_score_matrix(dir / "scores.csv", data.planted);
    std::string ext = "instance_id,label_copy\n";
    const auto y = data.corpus.labels(Outcome::BehaviorAdjustment);
    for (std::size_t i = 0; i < data.corpus.size(); ++i)
        ext += data.corpus.instances[i].id + "," + std::to_string(y[i]) + "\n";
    write_file(dir / "ext.csv", ext);
    std::ostringstream log;
    cmd_evaluate(c, {dir / "scores.csv", dir / "corpus.jsonl", dir / "ext.csv", {}, dir / "eval"}, log);
    const auto table = read_csv(dir / "eval" / "table_outcomes.csv");
    bool flagged = false;
    for (const auto& row : table.rows)
        if (row[0] == outcome_label(Outcome::BehaviorAdjustment) && row[1] == "Prior") flagged = row.back() == "yes";
    EXPECT_TRUE(flagged);
    EXPECT_TRUE(fs::exists(dir / "eval" / "table_delong.csv"));
}

TEST(Commands, AssociateRejectsUnknownOutcome) {
    rt::TempDir dir;
    std::ostringstream log;
    EXPECT_THROW(cmd_associate(test_config(dir), {dir / "s.csv", write_corpus_file(dir), "happiness", {}}, log),
                 ConfigError);
}

TEST(Commands, StabilityOfIdenticalRubrics) {
    rt::TempDir dir;
    const auto rubric = rt::simple_rubric({"Clarity", "Urgency"});
    write_rubric(dir / "r1.json", rubric);
    write_rubric(dir / "r2.json", rubric);
    discovery::DiscoveryResult disc;
    discovery::AgentRun run;
    run.agent_id = 1;
    CandidateCriterion cc;
    cc.agent_id = 1;
    cc.ordinal = 1;
    cc.name = rubric.dimensions[0].name;
    cc.definition = rubric.dimensions[0].definition;
    cc.anchors = {"No Clarity", "Some Clarity", "Strong Clarity"};
    run.criteria = {cc};
    disc.runs = {run};
    discovery::write_discovery(dir / "discovery.json", disc);
    std::ostringstream log;
    const auto res = cmd_stability(test_config(dir), {{dir / "r1.json", dir / "r2.json"}, dir / "discovery.json", dir / "st.json"}, log);
    const auto j = nlohmann::json::parse(read_text_file(dir / "st.json"));
    EXPECT_NEAR(j["drift"]["overall_mean_distance"].get<double>(), 0.0, 1e-12);
    EXPECT_TRUE(j["drift"]["below_threshold"].get<bool>());
    EXPECT_DOUBLE_EQ(j["coverage"][0]["coverage_fraction"].get<double>(), 1.0);
    EXPECT_TRUE(fs::exists(res.manifest));
}

TEST(Commands, SingleCriterionConsolidates) {
    rt::TempDir dir;
    discovery::DiscoveryResult disc;
    discovery::AgentRun run;
    run.agent_id = 1;
    CandidateCriterion cc;
    cc.agent_id = 1;
    cc.ordinal = 1;
    cc.name = "Clarity";
    cc.definition = "How clear it is";
    cc.anchors = {"Vague", "Okay", "Clear"};
    run.criteria = {cc};
    disc.runs = {run};
    discovery::write_discovery(dir / "discovery.json", disc);
    std::ostringstream log;
    cmd_consolidate(test_config(dir), {dir / "discovery.json", write_corpus_file(dir), {}, dir / "cons"}, log);
    const auto rubric = read_rubric(dir / "cons" / "rubric.json");
    ASSERT_EQ(rubric.size(), 1u);
    EXPECT_EQ(rubric.dimensions[0].name, "Clarity");
    EXPECT_EQ(rubric.dimensions[0].source_cluster, (std::vector<std::string>{"a1.1"}));
}

TEST(Commands, EndToEndOnMock) {
    rt::TempDir dir;
    auto c = test_config(dir);
    c.consolidation.seeds = {0, 1};
    const auto corpus = write_corpus_file(dir, 8, 10);
    std::ostringstream log;
    cmd_discover(c, {corpus, dir / "discovery.json"}, log);
    const auto cons = cmd_consolidate(c, {dir / "discovery.json", corpus, {}, dir / "cons"}, log);
    const auto rubric = read_rubric(dir / "cons" / "rubric.json");
    EXPECT_GE(rubric.size(), 2u);
    EXPECT_TRUE(fs::exists(dir / "cons" / "rubric-seed1.json"));
    EXPECT_TRUE(fs::exists(dir / "cons" / "silhouette.csv"));
    const auto man = read_manifest(cons.manifest);
    EXPECT_EQ(man.command, "consolidate");
    EXPECT_FALSE(man.corpus_digest.empty());
    cmd_score(c, {dir / "cons" / "rubric.json", corpus, "run1", dir / "s1.csv"}, log);
    cmd_score(c, {dir / "cons" / "rubric.json", corpus, "run2", dir / "s2.csv"}, log);
    const auto st = cmd_stability(c, {{dir / "cons" / "rubric.json", dir / "cons" / "rubric-seed1.json"}, {}, dir / "st.json"}, log);
    EXPECT_TRUE(fs::exists(st.manifest));
    cmd_associate(c, {dir / "s1.csv", corpus, "behavior_adjustment", dir / "rr.csv"}, log);
    const auto rr = read_csv(dir / "rr.csv");
    EXPECT_EQ(rr.rows.size(), rubric.size());
    EXPECT_TRUE(fs::exists(dir / "rr.fit.json"));
}

TEST(Cli, ExitCodes) {
    rt::TempDir dir;
    std::string out;
    EXPECT_EQ(run_cli("--version", &out), 0);
    EXPECT_NE(out.find("0.3.0"), std::string::npos);
    EXPECT_EQ(run_cli("", &out), 2);
    EXPECT_EQ(run_cli("frobnicate", &out), 2);
    EXPECT_EQ(run_cli("discover --corpus " + (dir / "none.jsonl").string(), &out), 3);
    EXPECT_NE(out.find("none.jsonl"), std::string::npos);
    write_corpus_file(dir);
    const std::string common = " --run-cache-dir " + (dir / "cache").string() + " --run-output-dir " + (dir / "out").string();
    EXPECT_EQ(run_cli("--set discovery.n_agents=0" + common + " discover --corpus " + (dir / "corpus.jsonl").string(), &out), 2);
    EXPECT_EQ(run_cli("--set nope.key=1 config", &out), 2);
    EXPECT_EQ(run_cli(common + " config", &out), 0);
    EXPECT_NE(out.find("[discovery]"), std::string::npos);
    EXPECT_EQ(run_cli("--discovery-subset-size 20" + common + " discover --corpus " + (dir / "corpus.jsonl").string(), &out), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "discovery.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "discovery.manifest.json"));
}
