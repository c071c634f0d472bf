#include "rubricforge/consolidation/consolidation.hpp"
#include "rubricforge/discovery/discovery.hpp"
#include "rubricforge/judge/judge.hpp"
#include "rubricforge/llm/mock.hpp"
#include "rubricforge/llm/parsers.hpp"
#include "rubricforge/pipeline/commands.hpp"
#include "rubricforge/stability/stability.hpp"
#include "rubricforge/stats/glmm.hpp"
#include "rubricforge/stats/kappa.hpp"
#include "rubricforge/stats/ranks.hpp"
#include "rubricforge/stats/roc.hpp"
#include "rubricforge/util/csv.hpp"
#include "rubricforge/util/hash.hpp"
#include "rubricforge/util/io.hpp"
#include "rubricforge/util/parallel.hpp"
#include "rubricforge/util/rng.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

using namespace rubricforge;
namespace rt = rubricforge::testing;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << std::fixed << v;
    return s.str();
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

// 1. Statistics oracle suite.
Verdict oracle_suite() {
    Rng rng(20240601, "oracle-suite");
    double worst_rho = 0, worst_kappa = 0, worst_auc = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(3, 50));
        const bool discrete = t % 2 == 0;
        std::vector<double> x(n), y(n);
        do {
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = discrete ? static_cast<double>(rng.uniform_int(1, 5)) : rng.normal();
                y[i] = discrete ? static_cast<double>(rng.uniform_int(1, 5)) : 0.5 * x[i] + rng.normal();
            }
        } while (stats::sample_sd(x) == 0 || stats::sample_sd(y) == 0);
        worst_rho = std::max(worst_rho, std::abs(stats::spearman_rho(x, y) - rt::brute_spearman(x, y)));

        std::vector<int> a(n), b(n);
        do {
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = static_cast<int>(rng.uniform_int(1, 5));
                b[i] = rng.bernoulli(0.6) ? a[i] : static_cast<int>(rng.uniform_int(1, 5));
            }
        } while (!std::isfinite(rt::brute_weighted_kappa(a, b, 5)));
        worst_kappa = std::max(worst_kappa, std::abs(stats::weighted_kappa(a, b, 5) - rt::brute_weighted_kappa(a, b, 5)));

        std::vector<int> labels(n);
        do {
            for (auto& l : labels) l = rng.bernoulli(0.4) ? 1 : 0;
        } while (std::count(labels.begin(), labels.end(), 1) == 0 || std::count(labels.begin(), labels.end(), 0) == 0);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i)
            s[i] = discrete ? static_cast<double>(rng.uniform_int(1, 5) + labels[i]) : rng.normal() + labels[i];
        worst_auc = std::max(worst_auc, std::abs(stats::auroc(s, labels) - rt::brute_auroc(s, labels)));
    }
    const double worst = std::max({worst_rho, worst_kappa, worst_auc});
    return {worst <= 1e-10, "max |diff| spearman " + sci(worst_rho) + ", kappa " + sci(worst_kappa) + ", auroc " +
                                sci(worst_auc) + " over 1000 instances"};
}

// 2. DeLong variance against the stratified bootstrap, and paired test size.
Verdict delong_validity() {
    constexpr std::size_t kDatasets = 200, kN = 200, kResamples = 10000;
    std::vector<int> within(kDatasets, 0), rejected(kDatasets, 0);
    std::vector<double> ratio(kDatasets, 0);
    parallel_for(kDatasets, 0, [&](std::size_t d) {
        Rng rng(77, "delong-validity", d);
        std::vector<int> y(kN);
        for (std::size_t i = 0; i < kN; ++i) y[i] = i < kN / 2 ? 1 : 0;
        std::vector<double> base(kN), a(kN), b(kN);
        for (std::size_t i = 0; i < kN; ++i) {
            base[i] = rng.normal() + 1.0 * y[i];
            a[i] = base[i] + rng.normal();
            b[i] = base[i] + rng.normal();
        }
        const double dl = stats::delong_ci(base, y).variance;
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < kN; ++i) (y[i] ? pos : neg).push_back(i);
        std::vector<double> rs(kN);
        std::vector<int> ry(kN);
        double sum = 0, sum2 = 0;
        for (std::size_t r = 0; r < kResamples; ++r) {
            std::size_t k = 0;
            for (const auto* cls : {&pos, &neg})
                for (std::size_t j = 0; j < cls->size(); ++j, ++k) {
                    const auto i = (*cls)[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cls->size()) - 1))];
                    rs[k] = base[i];
                    ry[k] = y[i];
                }
            const double v = stats::auroc(rs, ry);
            sum += v;
            sum2 += v * v;
        }
        const double boot = (sum2 - sum * sum / kResamples) / (kResamples - 1);
        ratio[d] = dl / boot;
        within[d] = std::abs(ratio[d] - 1.0) <= 0.15;
        rejected[d] = stats::delong_paired(a, b, y).p_value < 0.05;
    });
    const int n_within = std::accumulate(within.begin(), within.end(), 0);
    const int n_rejected = std::accumulate(rejected.begin(), rejected.end(), 0);
    const double type1 = static_cast<double>(n_rejected) / kDatasets;
    std::sort(ratio.begin(), ratio.end());
    return {n_within >= 180 && type1 >= 0.02 && type1 <= 0.08,
            "variance within 15% in " + std::to_string(n_within) + "/200 (median ratio " + num(ratio[100], 3) +
                "), paired type-I error " + num(type1, 3)};
}

pipeline::PipelineConfig base_config(const fs::path& dir) {
    pipeline::PipelineConfig c;
    c.run.cache_dir = (dir / "cache").string();
    c.run.output_dir = (dir / "out").string();
    c.run.progress = false;
    return c;
}

double table_auroc(const fs::path& table, const std::string& outcome, const std::string& features) {
    const auto t = read_csv(table);
    for (const auto& row : t.rows)
        if (row[0] == outcome && row[1] == features) return std::stod(row[3]);
    throw DataError(table.string() + ": no row for " + outcome + " / " + features);
}

// 3. Planted logistic signal recovered by nested cross-validation.
Verdict planted_signal(const std::vector<int>& forest_trees) {
    rt::TempDir dir("rf-accept-signal");
    auto c = base_config(dir.path());
    std::ostringstream log;
    {
        std::ofstream f(dir / "spec.json");
        f << format_synthetic_spec(rt::small_spec(100, 50));
    }
    pipeline::cmd_synth(c, {dir / "spec.json", 2024, dir / "synth"}, log);
    const auto truth = nlohmann::json::parse(read_text_file(dir / "synth" / "truth.json"));
    const double sample_bayes = truth["outcomes"]["behavior_adjustment"]["true_model_auroc"].get<double>();
    const std::string label = outcome_label(Outcome::BehaviorAdjustment);
    std::map<std::string, double> got;
    for (const std::string model : {"logistic", "random_forest"}) {
        c.evaluation.model = model;
        c.evaluation.n_estimators = forest_trees;
        pipeline::cmd_evaluate(c, {dir / "synth" / "planted_scores.csv", dir / "synth" / "corpus.jsonl", {}, {}, dir / model},
                               log);
        got[model] = table_auroc(dir / model / "table_outcomes.csv", label, "AI quality");
    }
    const bool pass = std::abs(got["logistic"] - 0.80) <= 0.05 && std::abs(got["random_forest"] - 0.80) <= 0.05;
    return {pass, "n=5000, target 0.80 (sample Bayes " + num(sample_bayes, 3) + "): logistic " + num(got["logistic"], 3) +
                      ", random forest " + num(got["random_forest"], 3)};
}

struct GlmmData {
    std::vector<double> y;
    Eigen::MatrixXd X;
    std::vector<std::string> groups;
};

GlmmData simulate_glmm(const Eigen::VectorXd& beta, double sigma, std::uint64_t seed) {
    constexpr int kCases = 200, kPer = 30;
    Rng rng(seed, "glmm-recovery");
    GlmmData d;
    d.X.resize(kCases * kPer, beta.size() - 1);
    for (int g = 0; g < kCases; ++g) {
        const double u = sigma * rng.normal();
        for (int j = 0; j < kPer; ++j) {
            const int r = g * kPer + j;
            double eta = beta(0) + u;
            for (Eigen::Index k = 1; k < beta.size(); ++k) {
                d.X(r, k - 1) = rng.normal();
                eta += beta(k) * d.X(r, k - 1);
            }
            d.y.push_back(static_cast<double>(rng.poisson(std::exp(eta))));
            d.groups.push_back("case-" + std::to_string(g));
        }
    }
    return d;
}

// 4. GLMM Wald coverage and the sigma = 0 reduction.
Verdict glmm_recovery() {
    Eigen::VectorXd beta(4);
    beta << -0.5, 0.3, -0.2, 0.1;
    constexpr std::size_t kSims = 100;
    std::vector<std::vector<int>> covered(kSims, std::vector<int>(4, 0));
    std::vector<double> sigmas(kSims);
    parallel_for(kSims, 0, [&](std::size_t s) {
        const auto d = simulate_glmm(beta, 0.4, s + 1);
        const auto fit = stats::fit_poisson_glmm(d.y, d.X, d.groups);
        sigmas[s] = fit.sigma;
        for (Eigen::Index k = 0; k < 4; ++k)
            covered[s][static_cast<std::size_t>(k)] = std::abs(fit.beta(k) - beta(k)) <= 1.959963984540054 * fit.std_errors(k);
    });
    std::vector<int> counts(4, 0);
    for (const auto& c : covered)
        for (std::size_t k = 0; k < 4; ++k) counts[k] += c[k];
    const auto zero = simulate_glmm(beta, 0.0, 999);
    stats::GlmmOptions o;
    o.fix_sigma_zero = true;
    const auto fit0 = stats::fit_poisson_glmm(zero.y, zero.X, zero.groups, o);
    const auto oracle = rt::irls_poisson(zero.y, zero.X);
    const double diff = (fit0.beta - oracle).cwiseAbs().maxCoeff();
    const auto free_fit = stats::fit_poisson_glmm(zero.y, zero.X, zero.groups);
    std::string detail = "coverage per coefficient";
    bool pass = diff <= 1e-6;
    for (int c : counts) {
        detail += " " + std::to_string(c);
        pass = pass && c >= 90;
    }
    std::sort(sigmas.begin(), sigmas.end());
    detail += "/100 (median sigma " + num(sigmas[50], 3) + "), sigma=0 vs IRLS max |diff| " + sci(diff) +
              " (unconstrained fit on the same data: sigma " + num(free_fit.sigma, 4) + ", max |diff| " +
              sci((free_fit.beta - oracle).cwiseAbs().maxCoeff()) + ")";
    return {pass, detail};
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    double agree = 0, pairs = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            agree += (a[i] == a[j]) == (b[i] == b[j]);
            pairs += 1;
        }
    return agree / pairs;
}

// 5. Planted correlation groups recovered by single linkage + silhouette.
Verdict consolidation_correctness() {
    const auto planted = rt::planted_candidates(6, {7, 5, 6, 4, 5, 4}, 300, 0.1, 606);
    std::map<int, int> per_agent;
    for (const auto& c : planted.criteria) ++per_agent[c.agent_id];
    const auto rho = consolidation::spearman_correlation_matrix(planted.scores);
    const auto dist = consolidation::clustering_distances(rho.rho, consolidation::FeatureMode::CorrelationRows);
    const auto dendro = consolidation::single_linkage(dist);
    const auto [k_min, k_max] = consolidation::default_k_range(planted.criteria.size());
    const auto sel = consolidation::select_k_by_silhouette(dendro, dist, k_min, k_max);
    const auto labels = consolidation::cut_dendrogram(dendro, sel.k_best);
    const double ri = rand_index(labels, planted.group);
    std::string agents;
    for (const auto& [a, n] : per_agent) agents += (agents.empty() ? "" : "/") + std::to_string(n);
    return {sel.k_best == 6 && ri == 1.0, std::to_string(planted.criteria.size()) + " candidates from 5 agents (" + agents +
                                              "): k=" + std::to_string(sel.k_best) + ", Rand index " + num(ri, 4)};
}

pipeline::PipelineConfig e2e_config(const fs::path& dir) {
    auto c = base_config(dir);
    c.discovery.subset_size = 20;
    c.consolidation.seeds = {0, 1};
    c.evaluation.outer_k = 3;
    c.evaluation.inner_k = 3;
    c.evaluation.n_estimators = {50};
    c.evaluation.max_features = {3};
    c.evaluation.max_depth = {6};
    c.evaluation.min_samples_leaf = {5};
    c.evaluation.holdout_seeds = {0, 1, 2};
    return c;
}

void run_e2e(const pipeline::PipelineConfig& c, const fs::path& corpus) {
    std::ostringstream log;
    const fs::path out = c.run.output_dir;
    pipeline::cmd_discover(c, {corpus, out / "discovery.json"}, log);
    pipeline::cmd_consolidate(c, {out / "discovery.json", corpus, {}, out / "consolidated"}, log);
    pipeline::cmd_score(c, {out / "consolidated" / "rubric.json", corpus, "run1", out / "scores-run1.csv"}, log);
    pipeline::cmd_evaluate(c, {out / "scores-run1.csv", corpus, {}, out / "consolidated" / "candidate_scores.csv", out / "eval"},
                           log);
}

// Relative path -> SHA-256 of every artifact except run manifests.
std::map<std::string, std::string> artifact_digests(const fs::path& out) {
    std::map<std::string, std::string> d;
    for (const auto& e : fs::recursive_directory_iterator(out)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        if (name.size() > 14 && name.substr(name.size() - 14) == ".manifest.json") continue;
        d[fs::relative(e.path(), out).string()] = sha256_hex(read_text_file(e.path()));
    }
    return d;
}

// 6. Fresh runs and a resumed run agree byte for byte.
Verdict e2e_determinism() {
    rt::TempDir dir("rf-accept-e2e");
    write_corpus(dir / "corpus.jsonl", rt::small_corpus(12, 10, 5));
    const auto a = e2e_config(dir / "a");
    const auto b = e2e_config(dir / "b");
    run_e2e(a, dir / "corpus.jsonl");
    run_e2e(b, dir / "corpus.jsonl");

    auto killed = e2e_config(dir / "c");
    killed.backend.mock_fail_after = 200;
    bool interrupted = false;
    try {
        run_e2e(killed, dir / "corpus.jsonl");
    } catch (const BackendError&) {
        interrupted = true;
    }
    const auto resumed = e2e_config(dir / "c");
    run_e2e(resumed, dir / "corpus.jsonl");
    const auto man = pipeline::read_manifest(dir / "c" / "out" / "consolidated" / "rubric.manifest.json");

    const auto da = artifact_digests(dir / "a" / "out"), db = artifact_digests(dir / "b" / "out"),
               dc = artifact_digests(dir / "c" / "out");
    const bool pass = interrupted && da == db && da == dc && da.size() >= 10;
    return {pass, std::to_string(da.size()) + " artifacts; fresh runs " + (da == db ? "identical" : "differ") +
                      "; interrupted " + (interrupted ? "yes" : "no") + ", resumed run " + (da == dc ? "identical" : "differs") +
                      " (consolidate cache hits " + man.counters.at("cache_hits") + ")"};
}

// 7. Agreement without and with scripted run2 noise.
Verdict agreement_pipeline() {
    const auto corpus = rt::small_corpus(20, 10, 9);
    const auto rubric = rt::simple_rubric({"Encouragement", "Urgency", "Actionability", "Timeliness", "Clarity", "Reflection"});
    llm::MockCompletionBackend clean;
    llm::ResponseCache cache;
    llm::LlmClient clean_client(clean, &cache);
    const auto same = judge::repeat_agreement(clean_client, rubric, corpus, {}, 2000, 1);
    bool ones = same.size() == 6;
    for (const auto& d : same) ones = ones && d.estimate.kappa == 1.0;

    llm::MockOptions o;
    o.noise_tag = "run2";
    o.noise_rate = 0.1;
    llm::MockCompletionBackend noisy(o);
    llm::LlmClient noisy_client(noisy, nullptr);
    const auto run1 = judge::score_corpus(noisy_client, rubric, corpus, "run1");
    const auto run2 = judge::score_corpus(noisy_client, rubric, corpus, "run2");
    const auto agreement = judge::matrix_agreement(run1.scores, run2.scores, 2000, 1);
    double worst = 0;
    bool contained = true;
    std::string kappas;
    std::size_t changed = 0;
    for (std::size_t d = 0; d < agreement.size(); ++d) {
        const auto c1 = run1.scores.column(d), c2 = run2.scores.column(d);
        for (std::size_t i = 0; i < c1.size(); ++i) changed += c1[i] != c2[i];
        const auto& e = agreement[d].estimate;
        worst = std::max(worst, std::abs(e.kappa - rt::brute_weighted_kappa(c1, c2, 5)));
        contained = contained && e.ci_low <= e.kappa && e.kappa <= e.ci_high;
        kappas += (d ? " " : "") + num(e.kappa, 3);
    }
    const double rate = static_cast<double>(changed) / static_cast<double>(6 * corpus.size());
    return {ones && worst <= 1e-10 && contained && changed > 0,
            std::string("clean kappa ") + (ones ? "1.0 on all 6" : "not 1.0") + "; noisy (" + num(100 * rate, 1) +
                "% changed) kappa " + kappas + ", max |diff| vs brute " + sci(worst) +
                (contained ? ", CIs contain estimates" : ", CI misses estimate")};
}

// 8. Drift, coverage and the threshold sweep.
Verdict stability_metrics() {
    rt::TempDir dir("rf-accept-stability");
    const auto rubric = rt::simple_rubric({"Clarity", "Urgency", "Reflection", "Actionability"});
    std::vector<fs::path> files;
    for (int s = 0; s < 5; ++s) {
        files.push_back(dir / ("rubric-seed" + std::to_string(s) + ".json"));
        write_rubric(files.back(), rubric);
    }
    discovery::DiscoveryResult disc;
    discovery::AgentRun run;
    run.agent_id = 1;
    for (std::size_t i = 0; i < rubric.size(); ++i) {
        CandidateCriterion c;
        c.agent_id = 1;
        c.ordinal = static_cast<int>(i + 1);
        c.name = rubric.dimensions[i].name;
        c.definition = rubric.dimensions[i].definition;
        for (std::size_t a = 0; a < 3; ++a) c.anchors[a] = rubric.dimensions[i].anchors[a].description;
        run.criteria.push_back(c);
    }
    disc.runs = {run};
    discovery::write_discovery(dir / "discovery.json", disc);
    std::ostringstream log;
    pipeline::cmd_stability(base_config(dir.path()), {files, dir / "discovery.json", dir / "stability.json"}, log);
    const auto j = nlohmann::json::parse(read_text_file(dir / "stability.json"));
    const double drift = j["drift"]["overall_mean_distance"].get<double>();
    const std::string verdict = j["drift"]["verdict"].get<std::string>();
    bool full = true;
    for (const auto& c : j["coverage"]) full = full && c["coverage_fraction"].get<double>() == 1.0;

    llm::HashEmbeddingBackend backend(256);
    llm::EmbeddingClient embedder(backend);
    const auto orthogonal = stability::vocabulary_coverage(embedder, {"zebra quokka xylophone marmalade"}, rubric);

    llm::HashEmbeddingBackend coarse(6);
    llm::EmbeddingClient coarse_embedder(coarse);
    std::vector<std::string> mixed = stability::rubric_texts(rubric);
    mixed.push_back("keep the needle perpendicular and tie three throws");
    const auto sims = stability::term_similarities(coarse_embedder, mixed, rubric);
    const std::vector<double> sweep_points{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    const auto sweep = stability::coverage_sweep(sims, sweep_points);
    bool monotone = true;
    for (std::size_t i = 1; i < sweep.size(); ++i)
        monotone = monotone && sweep[i].coverage_fraction <= sweep[i - 1].coverage_fraction;
    const auto table = read_csv(dir / "stability_sweep.csv");
    for (std::size_t c = 1; c < table.header.size(); ++c)
        for (std::size_t r = 1; r < table.rows.size(); ++r)
            monotone = monotone && std::stod(table.rows[r][c]) <= std::stod(table.rows[r - 1][c]);

    const bool pass = std::abs(drift) <= 1e-12 && verdict == "below 0.05 threshold" && full &&
                      orthogonal.coverage_fraction == 0.0 && monotone;
    return {pass, "drift " + sci(drift) + " (\"" + verdict + "\"), self coverage " + (full ? "1.0" : "<1.0") +
                      " on 5 rubrics, orthogonal coverage " + num(orthogonal.coverage_fraction, 3) + ", sweep " +
                      num(sweep.front().coverage_fraction, 3) + " -> " + num(sweep.back().coverage_fraction, 3) +
                      (monotone ? " monotone" : " NOT monotone")};
}

// 9. Random inputs only ever produce ParseError.
Verdict parser_fuzz() {
    Rng rng(99, "parser-fuzz");
    const std::string structural = "|()\"',0123456789 \n\r\t-[]`\\.abcNo:";
    std::size_t structured = 0, accepted = 0, other = 0;
    std::string first_other;
    for (std::size_t t = 0; t < 100000; ++t) {
        const auto len = static_cast<std::size_t>(rng.uniform_int(0, 160));
        std::string s(len, '\0');
        const bool raw = t % 2 == 0;
        for (auto& ch : s)
            ch = raw ? static_cast<char>(rng.uniform_int(0, 255))
                     : structural[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(structural.size()) - 1))];
        const std::size_t expected = 1 + t % 8;
        const std::function<void()> calls[] = {[&] { llm::parse_criteria_rows(s); },
                                               [&] { llm::parse_consolidated_tuple(s); },
                                               [&] { llm::parse_score_list(s, expected); }};
        for (const auto& call : calls) {
            try {
                call();
                ++accepted;
            } catch (const ParseError&) {
                ++structured;
            } catch (const std::exception& e) {
                if (other++ == 0) first_other = e.what();
            }
        }
    }
    return {other == 0, "100000 inputs x 3 parsers: " + std::to_string(structured) + " ParseError, " +
                            std::to_string(accepted) + " parsed, " + std::to_string(other) + " other" +
                            (other ? " (first: " + first_other + ")" : "")};
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Verdict()> run;
};

} // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    const std::vector<Criterion> criteria{
        {1, "statistics oracle suite", 30, oracle_suite},
        {2, "DeLong validity", 300, delong_validity},
        {3, "planted-signal pipeline", 600, [] { return planted_signal({200}); }},
        {4, "GLMM recovery", 600, glmm_recovery},
        {5, "consolidation correctness", 10, consolidation_correctness},
        {6, "end-to-end determinism", 120, e2e_determinism},
        {7, "agreement pipeline", 60, agreement_pipeline},
        {8, "stability metrics", 30, stability_metrics},
        {9, "parser robustness", 120, parser_fuzz},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.limit_seconds;
        const bool pass = v.pass && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << " [" << num(secs, 1) << " s / "
                  << num(c.limit_seconds, 0) << " s" << (in_time ? "" : " EXCEEDED") << "]: " << v.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
