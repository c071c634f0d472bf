#include "rubricforge/pipeline/commands.hpp"

#include "rubricforge/consolidation/consolidation.hpp"
#include "rubricforge/corpus/synthetic.hpp"
#include "rubricforge/discovery/discovery.hpp"
#include "rubricforge/judge/judge.hpp"
#include "rubricforge/llm/mock.hpp"
#include "rubricforge/llm/openai.hpp"
#include "rubricforge/stability/stability.hpp"
#include "rubricforge/stats/glmm.hpp"
#include "rubricforge/stats/kappa.hpp"
#include "rubricforge/stats/model_selection.hpp"
#include "rubricforge/util/csv.hpp"
#include "rubricforge/util/hash.hpp"
#include "rubricforge/util/io.hpp"
#include "rubricforge/util/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <set>
#include <unordered_map>

namespace rubricforge::pipeline {

using nlohmann::ordered_json;

Backends::Backends(const PipelineConfig& config) : config_(config) {
    const auto& b = config.backend;
    if (b.kind == "mock") {
        llm::MockOptions opts;
        opts.seed = b.mock_seed;
        opts.candidate_noise = b.mock_candidate_noise;
        opts.noise_tag = b.mock_noise_tag;
        opts.noise_rate = b.mock_noise_rate;
        opts.max_extra_criteria = b.mock_max_extra_criteria;
        if (b.mock_fail_after >= 0) opts.fail_after = static_cast<std::size_t>(b.mock_fail_after);
        std::map<std::string, std::string> scenario;
        if (!b.mock_scenario.empty()) scenario = llm::MockCompletionBackend::load_scenario(b.mock_scenario);
        completion_ = std::make_unique<llm::MockCompletionBackend>(opts, std::move(scenario));
    } else {
        llm::OpenAiSettings s;
        s.base_url = b.base_url;
        s.api_key = b.api_key;
        s.timeout_seconds = b.timeout_seconds;
        completion_ = std::make_unique<llm::OpenAiBackend>(s);
    }
    if (config.run.cache_dir.empty()) cache_ = std::make_unique<llm::ResponseCache>();
    else cache_ = std::make_unique<llm::ResponseCache>(fs::path(config.run.cache_dir));
    llm::RetryPolicy policy;
    policy.max_attempts = b.max_attempts;
    policy.base_delay_seconds = b.retry_base_delay;
    client_ = std::make_unique<llm::LlmClient>(*completion_, cache_.get(), policy);
}

Backends::~Backends() = default;

llm::EmbeddingClient& Backends::embedder() {
    if (!embedder_) {
        const auto& b = config_.backend;
        if (b.embedding_kind == "hash") {
            embedding_ = std::make_unique<llm::HashEmbeddingBackend>(static_cast<std::size_t>(b.embedding_dimension));
        } else {
            llm::OpenAiSettings s;
            s.base_url = b.base_url;
            s.api_key = b.api_key;
            s.embedding_model = b.embedding_model;
            s.timeout_seconds = b.timeout_seconds;
            embedding_ = std::make_unique<llm::OpenAiEmbeddingBackend>(s);
        }
        embedder_ = std::make_unique<llm::EmbeddingClient>(*embedding_);
    }
    return *embedder_;
}

namespace {

fs::path ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

fs::path output_dir_of(const PipelineConfig& config, const fs::path& explicit_dir) {
    return ensure_dir(explicit_dir.empty() ? fs::path(config.run.output_dir) : explicit_dir);
}

fs::path output_file(const PipelineConfig& config, const fs::path& explicit_path, const std::string& default_name) {
    if (!explicit_path.empty()) {
        if (explicit_path.has_parent_path()) ensure_dir(explicit_path.parent_path());
        return explicit_path;
    }
    return output_dir_of(config, {}) / default_name;
}

void require_file(const fs::path& path, const std::string& role) {
    if (path.empty()) throw ConfigError(role + " path is required");
    if (!fs::exists(path)) throw DataError(role + " not found: " + path.string());
}

RunManifest start_manifest(const PipelineConfig& config, const std::string& command) {
    RunManifest m;
    m.command = command;
    m.tool_version = tool_version();
    m.config = config_snapshot(config);
    m.started_at = utc_timestamp();
    return m;
}

fs::path finish_manifest(RunManifest& m, const fs::path& primary_output) {
    m.finished_at = utc_timestamp();
    const auto path = manifest_path_for(primary_output);
    write_manifest(path, m);
    return path;
}

std::vector<std::string> new_keys(const llm::LlmClient& client, std::size_t& seen) {
    const auto keys = client.keys_used();
    std::vector<std::string> out(keys.begin() + static_cast<std::ptrdiff_t>(std::min(seen, keys.size())), keys.end());
    seen = keys.size();
    return out;
}

void record_traffic(RunManifest& m, const llm::LlmClient& client) {
    m.counters["backend_invocations"] = std::to_string(client.backend_invocations());
    m.counters["cache_hits"] = std::to_string(client.cache_hits());
    m.counters["backend_id"] = client.backend_id();
}

Corpus load_checked_corpus(const fs::path& path) {
    require_file(path, "corpus");
    return load_corpus(path);
}

ScoreMatrix load_scores(const fs::path& path, const std::string& role) {
    require_file(path, role);
    return read_score_matrix(path);
}

judge::JudgeOptions judge_options(const PipelineConfig& config) {
    judge::JudgeOptions o;
    o.model_id = config.backend.model_id;
    o.temperature = config.scoring.temperature;
    o.max_reprompts = config.scoring.max_reprompts;
    o.concurrency = static_cast<std::size_t>(config.run.concurrency);
    o.failure_cap = config.scoring.failure_cap;
    return o;
}

CsvTable failures_table(const std::vector<judge::ScoringFailure>& failures) {
    CsvTable t;
    t.header = {"instance_id", "message", "raw"};
    for (const auto& f : failures) t.rows.push_back({f.instance_id, f.message, f.raw});
    return t;
}

std::string fixed(double v, int digits = 4) { return format_fixed(v, digits); }

// Maps score rows to corpus order; instances absent from the matrix are an error.
std::vector<std::size_t> align_rows(const ScoreMatrix& scores, const Corpus& corpus, const std::string& role) {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < scores.rows(); ++r) row_of.emplace(scores.instance_ids()[r], r);
    std::vector<std::size_t> out;
    out.reserve(corpus.size());
    for (const auto& inst : corpus.instances) {
        const auto it = row_of.find(inst.id);
        if (it == row_of.end()) throw DataError(role + " has no row for instance " + inst.id);
        out.push_back(it->second);
    }
    return out;
}

} // namespace

CommandResult cmd_discover(const PipelineConfig& config, const DiscoverArgs& args, std::ostream& log) {
    config.validate();
    const Corpus corpus = load_checked_corpus(args.corpus);
    const fs::path out = output_file(config, args.output, "discovery.json");
    Backends backends(config);
    discovery::DiscoveryOptions opts;
    opts.n_agents = config.discovery.n_agents;
    opts.subset_size = static_cast<std::size_t>(config.discovery.subset_size);
    opts.temperature = config.discovery.temperature;
    opts.seed = config.discovery.seed;
    opts.model_id = config.backend.model_id;
    opts.max_criteria = static_cast<std::size_t>(config.discovery.max_criteria);
    opts.concurrency = static_cast<std::size_t>(config.run.concurrency);

    RunManifest m = start_manifest(config, "discover");
    m.add_input("corpus", args.corpus);
    m.corpus_digest = corpus_digest(corpus);
    auto record = [&](const discovery::DiscoveryResult& r, const fs::path& path) {
        for (const auto& run : r.runs) {
            m.subsets["agent-" + std::to_string(run.agent_id)] = run.subset_ids;
            m.cache_keys["discovery"].push_back(run.cache_key);
        }
        record_traffic(m, backends.client());
        m.add_output("discovery", path);
    };
    CommandResult result;
    try {
        const auto r = discovery::run_discovery(backends.client(), corpus, opts);
        discovery::write_discovery(out, r);
        record(r, out);
        std::size_t n = 0;
        for (const auto& run : r.runs) n += run.criteria.size();
        log << "discover: " << r.runs.size() << " agents, " << n << " candidate criteria -> " << out.string() << "\n";
    } catch (const discovery::DiscoveryError& e) {
        const fs::path partial = out.parent_path() / (out.stem().string() + ".partial.json");
        discovery::write_discovery(partial, e.partial());
        record(e.partial(), partial);
        m.warnings.push_back(e.what());
        finish_manifest(m, partial);
        throw DataError(std::string(e.what()) + "; partial results in " + partial.string());
    }
    result.outputs.push_back(out);
    result.manifest = finish_manifest(m, out);
    return result;
}

CommandResult cmd_consolidate(const PipelineConfig& config, const ConsolidateArgs& args, std::ostream& log) {
    config.validate();
    require_file(args.discovery, "discovery file");
    const auto disc = discovery::read_discovery(args.discovery);
    const auto criteria = disc.criteria();
    if (criteria.empty()) throw DataError(args.discovery.string() + ": no candidate criteria");
    const fs::path dir = output_dir_of(config, args.output_dir);
    Backends backends(config);
    RunManifest m = start_manifest(config, "consolidate");
    m.add_input("discovery", args.discovery);
    CommandResult result;
    std::size_t seen = 0;

    std::vector<std::string> refs;
    for (const auto& c : criteria) refs.push_back(c.ref());
    ScoreMatrix scores;
    if (!args.scores.empty()) {
        const ScoreMatrix loaded = load_scores(args.scores, "candidate scores");
        m.add_input("candidate_scores", args.scores);
        std::vector<std::string> ids = loaded.instance_ids(), cases = loaded.case_ids();
        scores = ScoreMatrix(ids, cases, refs);
        for (std::size_t j = 0; j < refs.size(); ++j) {
            const auto c = loaded.column_of(refs[j]);
            if (!c) throw DataError(args.scores.string() + ": no column for criterion " + refs[j]);
            for (std::size_t r = 0; r < loaded.rows(); ++r)
                if (!loaded.missing(r, *c)) scores.set(r, j, loaded.at(r, *c));
        }
    } else {
        const Corpus corpus = load_checked_corpus(args.corpus);
        m.add_input("corpus", args.corpus);
        m.corpus_digest = corpus_digest(corpus);
        auto run = consolidation::score_candidates(backends.client(), corpus, criteria, judge_options(config));
        scores = run.scores;
        const fs::path sp = dir / "candidate_scores.csv";
        write_score_matrix(sp, scores);
        write_csv(dir / "candidate_scores.failures.csv", failures_table(run.failures));
        m.add_output("candidate_scores", sp);
        result.outputs.push_back(sp);
        m.cache_keys["candidate-scoring"] = new_keys(backends.client(), seen);
        for (const auto& f : run.failures) m.warnings.push_back("masked: " + f.message);
        log << "consolidate: scored " << criteria.size() << " candidates over " << corpus.size() << " instances ("
            << run.failures.size() << " failures)\n";
    }

    consolidation::ClusteringOptions copts;
    copts.missing = config.consolidation.missing == "listwise" ? consolidation::MissingRows::Listwise
                                                               : consolidation::MissingRows::Pairwise;
    copts.features = config.consolidation.feature_mode == "one_minus_rho" ? consolidation::FeatureMode::OneMinusRho
                                                                           : consolidation::FeatureMode::CorrelationRows;
    copts.k_min = static_cast<std::size_t>(config.consolidation.k_min);
    copts.k_max = static_cast<std::size_t>(config.consolidation.k_max);
    const auto clustering = consolidation::cluster_criteria(scores, copts);
    for (const auto& w : clustering.correlation.warnings) m.warnings.push_back(w);

    CsvTable corr;
    corr.header = {"criterion"};
    for (const auto& id : clustering.correlation.ids) corr.header.push_back(id);
    for (Eigen::Index i = 0; i < clustering.correlation.rho.rows(); ++i) {
        CsvRow row{clustering.correlation.ids[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < clustering.correlation.rho.cols(); ++j)
            row.push_back(format_double(clustering.correlation.rho(i, j)));
        corr.rows.push_back(row);
    }
    write_csv(dir / "correlation.csv", corr);
    CsvTable sil;
    sil.header = {"k", "mean_silhouette", "selected"};
    for (const auto& r : clustering.selection.table)
        sil.rows.push_back({std::to_string(r.k), fixed(r.mean_silhouette),
                            r.k == clustering.selection.k_best ? "*" : ""});
    write_table_pair(dir / "silhouette", sil);
    CsvTable dend;
    dend.header = {"step", "left", "right", "height", "size"};
    for (std::size_t i = 0; i < clustering.dendrogram.merges.size(); ++i) {
        const auto& mg = clustering.dendrogram.merges[i];
        dend.rows.push_back({std::to_string(i + 1), std::to_string(mg.left), std::to_string(mg.right),
                             format_double(mg.height), std::to_string(mg.size)});
    }
    write_csv(dir / "dendrogram.csv", dend);
    CsvTable clusters;
    clusters.header = {"criterion", "agent_id", "name", "cluster"};
    for (std::size_t i = 0; i < criteria.size(); ++i)
        clusters.rows.push_back({refs[i], std::to_string(criteria[i].agent_id), criteria[i].name,
                                 std::to_string(clustering.labels[i] + 1)});
    write_csv(dir / "clusters.csv", clusters);
    for (const char* f : {"correlation.csv", "silhouette.csv", "dendrogram.csv", "clusters.csv"}) {
        m.add_output(fs::path(f).stem().string(), dir / f);
        result.outputs.push_back(dir / f);
    }

    const auto groups = consolidation::group_by_labels(criteria, clustering.labels);
    consolidation::ConsolidationOptions opts;
    opts.model_id = config.backend.model_id;
    opts.temperature = config.consolidation.temperature;
    opts.concurrency = static_cast<std::size_t>(config.run.concurrency);
    const fs::path primary = dir / "rubric.json";
    const std::string manifest_name = manifest_path_for(primary).filename().string();
    const auto& seeds = config.consolidation.seeds;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        opts.seed = seeds[s];
        Rubric rubric = consolidation::consolidate_clusters(backends.client(), groups, opts);
        rubric.manifest = manifest_name;
        m.cache_keys["consolidation-seed-" + std::to_string(seeds[s])] = new_keys(backends.client(), seen);
        for (const auto& w : rubric.warnings) m.warnings.push_back(w);
        if (s == 0) {
            write_rubric(primary, rubric);
            m.add_output("rubric", primary);
            m.rubric_digest = sha256_file(primary);
            result.outputs.push_back(primary);
        }
        if (seeds.size() > 1) {
            const fs::path p = dir / ("rubric-seed" + std::to_string(seeds[s]) + ".json");
            write_rubric(p, rubric);
            m.add_output("rubric-seed" + std::to_string(seeds[s]), p);
            result.outputs.push_back(p);
        }
        log << "consolidate: seed " << seeds[s] << " -> " << rubric.size() << " dimensions\n";
    }
    record_traffic(m, backends.client());
    result.warnings = m.warnings;
    result.manifest = finish_manifest(m, primary);
    return result;
}

CommandResult cmd_score(const PipelineConfig& config, const ScoreArgs& args, std::ostream& log) {
    config.validate();
    require_file(args.rubric, "rubric");
    const Rubric rubric = read_rubric(args.rubric);
    rubric.validate();
    const Corpus corpus = load_checked_corpus(args.corpus);
    const std::string tag = args.replicate_tag.empty() ? config.scoring.replicate_tag : args.replicate_tag;
    const fs::path out = output_file(config, args.output, "scores-" + tag + ".csv");
    Backends backends(config);
    RunManifest m = start_manifest(config, "score");
    m.add_input("rubric", args.rubric);
    m.add_input("corpus", args.corpus);
    m.corpus_digest = corpus_digest(corpus);
    m.rubric_digest = sha256_file(args.rubric);
    m.counters["replicate_tag"] = tag;
    m.counters["temperature"] = format_double(config.scoring.temperature);

    std::size_t next_report = 0;
    judge::ProgressFn progress;
    if (config.run.progress)
        progress = [&](std::size_t done, std::size_t total) {
            if (done * 10 >= next_report * total || done == total) {
                log << "score: " << done << "/" << total << "\n";
                next_report = done * 10 / total + 1;
            }
        };
    const auto run = judge::score_corpus(backends.client(), rubric, corpus, tag, judge_options(config), progress);
    write_score_matrix(out, run.scores);
    const fs::path fail_path = out.parent_path() / (out.stem().string() + ".failures.csv");
    write_csv(fail_path, failures_table(run.failures));
    m.add_output("scores", out);
    m.add_output("mask", mask_path_for(out));
    m.add_output("failures", fail_path);
    std::size_t seen = 0;
    m.cache_keys["scoring"] = new_keys(backends.client(), seen);
    record_traffic(m, backends.client());
    for (const auto& f : run.failures) m.warnings.push_back("masked: " + f.message);
    log << "score: " << corpus.size() << " instances, " << run.failures.size() << " masked, "
        << backends.client().backend_invocations() << " backend calls, " << backends.client().cache_hits()
        << " cache hits -> " << out.string() << "\n";
    CommandResult result;
    result.outputs = {out, mask_path_for(out), fail_path};
    result.warnings = m.warnings;
    result.manifest = finish_manifest(m, out);
    return result;
}

namespace {

struct FeatureSet {
    std::string name;
    Eigen::MatrixXd X;
};

Eigen::MatrixXd score_features(const ScoreMatrix& scores, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(scores.cols()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < scores.cols(); ++c)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = scores.at(rows[i], c);
    return X;
}

// External features in corpus order for the kept instances.
Eigen::MatrixXd external_features(const Corpus& corpus, const std::vector<std::size_t>& kept, const fs::path& csv,
                                  std::vector<std::string>& names) {
    if (!csv.empty()) {
        const CsvTable t = read_csv(csv);
        const int id_col = t.column("instance_id");
        if (id_col < 0) throw DataError(csv.string() + ": missing instance_id column");
        for (std::size_t c = 0; c < t.header.size(); ++c)
            if (static_cast<int>(c) != id_col) names.push_back(t.header[c]);
        std::unordered_map<std::string, std::size_t> row_of;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& id = t.rows[r][static_cast<std::size_t>(id_col)];
            if (!corpus.index_of(id)) throw DataError(csv.string() + " line " + std::to_string(t.line_numbers[r]) +
                                                      ": instance " + id + " is not in the corpus");
            if (!row_of.emplace(id, r).second) throw DataError(csv.string() + ": duplicate instance " + id);
        }
        Eigen::MatrixXd X(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(names.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const auto& id = corpus.instances[kept[i]].id;
            const auto it = row_of.find(id);
            if (it == row_of.end()) throw DataError(csv.string() + ": no external features for instance " + id);
            std::size_t k = 0;
            for (std::size_t c = 0; c < t.header.size(); ++c) {
                if (static_cast<int>(c) == id_col) continue;
                const std::string& cell = t.rows[it->second][c];
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (cell.empty() || end != cell.c_str() + cell.size())
                    throw DataError(csv.string() + ": non-numeric value \"" + cell + "\" for " + id);
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k++)) = v;
            }
        }
        return X;
    }
    names = corpus.feature_names();
    if (names.empty()) return {};
    Eigen::MatrixXd X(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& inst = corpus.instances[kept[i]];
        for (std::size_t k = 0; k < names.size(); ++k) {
            const auto it = inst.external_features.find(names[k]);
            if (it == inst.external_features.end())
                throw DataError("instance " + inst.id + " lacks external feature " + names[k]);
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = it->second;
        }
    }
    return X;
}

stats::NestedCvOptions cv_options(const PipelineConfig& config) {
    const auto& e = config.evaluation;
    stats::NestedCvOptions o;
    o.outer_k = e.outer_k;
    o.inner_k = e.inner_k;
    o.kind = stats::model_kind_from_string(e.model);
    o.grid.n_estimators = e.n_estimators;
    o.grid.max_features = e.max_features;
    o.grid.max_depth = e.max_depth;
    o.grid.min_samples_leaf = e.min_samples_leaf;
    o.logistic.weighting = stats::ClassWeighting::RareEvent;
    o.logistic.target_prevalence = e.target_prevalence;
    o.balanced_class_weight = true;
    o.threads = static_cast<std::size_t>(config.run.concurrency);
    o.seed = e.seed;
    return o;
}

} // namespace

CommandResult cmd_evaluate(const PipelineConfig& config, const EvaluateArgs& args, std::ostream& log) {
    config.validate();
    const Corpus corpus = load_checked_corpus(args.corpus);
    if (!corpus.has_outcomes()) throw DataError(args.corpus.string() + ": outcome labels are missing");
    const ScoreMatrix scores = load_scores(args.scores, "scores");
    const fs::path dir = output_dir_of(config, args.output_dir);
    RunManifest m = start_manifest(config, "evaluate");
    m.add_input("scores", args.scores);
    m.add_input("corpus", args.corpus);
    m.corpus_digest = corpus_digest(corpus);

    const auto rows = align_rows(scores, corpus, args.scores.string());
    std::vector<std::size_t> kept, kept_rows;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (scores.row_complete(rows[i])) {
            kept.push_back(i);
            kept_rows.push_back(rows[i]);
        }
    if (kept.size() < corpus.size())
        m.warnings.push_back(std::to_string(corpus.size() - kept.size()) +
                             " instances with masked scores excluded from evaluation");
    if (kept.empty()) throw DataError("no instance has a complete score row");

    std::vector<FeatureSet> sets;
    sets.push_back({"AI quality", score_features(scores, kept_rows)});
    std::vector<std::string> ext_names;
    if (!args.external.empty()) {
        require_file(args.external, "external features");
        m.add_input("external", args.external);
    }
    Eigen::MatrixXd ext = external_features(corpus, kept, args.external, ext_names);
    const bool have_external = ext.cols() > 0;
    if (have_external) {
        sets.push_back({"Prior", ext});
        Eigen::MatrixXd both(ext.rows(), ext.cols() + sets[0].X.cols());
        both << ext, sets[0].X;
        sets.push_back({"Prior + AI quality", both});
    }

    const auto opts = cv_options(config);
    auto comparison_opts = opts;
    comparison_opts.inner_k = config.evaluation.comparison_inner_k;
    CsvTable t1;
    t1.header = {"outcome", "features", "model", "auroc", "ci_low", "ci_high", "n_pos", "n_neg", "leakage_suspect"};
    CsvTable t3;
    t3.header = {"outcome",         "full_auroc",      "full_ci_low",     "full_ci_high",    "delta_without_ai",
                 "without_ai_ci_low", "without_ai_ci_high", "without_ai_sig", "without_ai_p", "delta_without_prior",
                 "without_prior_ci_low", "without_prior_ci_high", "without_prior_sig", "without_prior_p"};
    for (Outcome o : kOutcomes) {
        const auto all = corpus.labels(o);
        std::vector<int> y;
        for (auto i : kept) y.push_back(all[i]);
        const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
        if (pos < static_cast<std::size_t>(opts.outer_k) || y.size() - pos < static_cast<std::size_t>(opts.outer_k)) {
            m.warnings.push_back(std::string(outcome_key(o)) + ": too few instances of a class for " +
                                 std::to_string(opts.outer_k) + "-fold evaluation; skipped");
            continue;
        }
        std::vector<stats::NestedCvResult> res;
        for (std::size_t s = 0; s < sets.size(); ++s) {
            const auto& fs_ = sets[s];
            res.push_back(stats::nested_cv_auroc(fs_.X, y, s == 0 ? opts : comparison_opts));
            const auto& p = res.back().pooled;
            const bool leak = p.auroc >= config.evaluation.leakage_threshold;
            if (leak)
                m.warnings.push_back(std::string(outcome_key(o)) + " / " + fs_.name + ": AUROC " + fixed(p.auroc) +
                                     " at or above the leakage threshold");
            t1.rows.push_back({outcome_label(o), fs_.name, config.evaluation.model, fixed(p.auroc), fixed(p.ci_low),
                               fixed(p.ci_high), std::to_string(p.n_pos), std::to_string(p.n_neg), leak ? "yes" : "no"});
            log << "evaluate: " << outcome_key(o) << " / " << fs_.name << " AUROC " << fixed(p.auroc, 3) << "\n";
        }
        if (have_external) {
            const auto& full = res[2].predictions;
            const auto ai_only = comparison_opts.inner_k == opts.inner_k
                                     ? res[0]
                                     : stats::nested_cv_auroc(sets[0].X, y, comparison_opts);
            const auto without_ai = stats::delong_paired(res[1].predictions, full, y);
            const auto without_prior = stats::delong_paired(ai_only.predictions, full, y);
            t3.rows.push_back({outcome_label(o), fixed(res[2].pooled.auroc), fixed(res[2].pooled.ci_low),
                               fixed(res[2].pooled.ci_high), fixed(without_ai.delta), fixed(without_ai.ci_low),
                               fixed(without_ai.ci_high), without_ai.significant ? "*" : "", fixed(without_ai.p_value),
                               fixed(without_prior.delta), fixed(without_prior.ci_low), fixed(without_prior.ci_high),
                               without_prior.significant ? "*" : "", fixed(without_prior.p_value)});
        }
    }
    CommandResult result;
    write_table_pair(dir / "table_outcomes", t1);
    m.add_output("table_outcomes", dir / "table_outcomes.csv");
    result.outputs.push_back(dir / "table_outcomes.csv");
    if (have_external) {
        write_table_pair(dir / "table_delong", t3);
        m.add_output("table_delong", dir / "table_delong.csv");
        result.outputs.push_back(dir / "table_delong.csv");
    }

    if (!args.candidate_scores.empty()) {
        const ScoreMatrix cand = load_scores(args.candidate_scores, "candidate scores");
        m.add_input("candidate_scores", args.candidate_scores);
        const auto cand_rows = align_rows(cand, corpus, args.candidate_scores.string());
        std::map<int, std::vector<std::size_t>> agent_cols;
        for (std::size_t c = 0; c < cand.cols(); ++c) {
            const auto& id = cand.dimension_ids()[c];
            const auto dot = id.find('.');
            int agent = 0;
            if (id.size() > 1 && id[0] == 'a' && dot != std::string::npos) {
                try {
                    agent = std::stoi(id.substr(1, dot - 1));
                } catch (const std::exception&) {
                    agent = 0;
                }
            }
            if (agent <= 0) throw DataError(args.candidate_scores.string() + ": column " + id + " is not a criterion reference");
            agent_cols[agent].push_back(c);
        }
        stats::ModelSpec spec;
        spec.kind = stats::ModelKind::Logistic;
        spec.logistic.weighting = stats::ClassWeighting::RareEvent;
        spec.logistic.target_prevalence = config.evaluation.target_prevalence;
        const auto& seeds = config.evaluation.holdout_seeds;
        CsvTable t5;
        t5.header = {"source"};
        for (Outcome o : kOutcomes) {
            t5.header.push_back(std::string(outcome_key(o)) + "_mean");
            t5.header.push_back(std::string(outcome_key(o)) + "_sd");
        }
        auto add_row = [&](const std::string& source, const std::function<double(std::size_t, std::size_t)>& value,
                           std::size_t ncols) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < corpus.size(); ++i) {
                bool ok = true;
                for (std::size_t c = 0; c < ncols && ok; ++c) ok = !std::isnan(value(i, c));
                if (ok) idx.push_back(i);
            }
            Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(ncols));
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t c = 0; c < ncols; ++c)
                    X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value(idx[r], c);
            CsvRow row{source};
            for (Outcome o : kOutcomes) {
                const auto all = corpus.labels(o);
                std::vector<int> y;
                for (auto i : idx) y.push_back(all[i]);
                try {
                    const auto h = stats::repeated_holdout_auroc(X, y, spec, seeds, config.evaluation.holdout_test_fraction);
                    row.push_back(fixed(h.mean));
                    row.push_back(fixed(h.sd));
                } catch (const DegenerateError& e) {
                    m.warnings.push_back(source + " / " + outcome_key(o) + ": " + e.what());
                    row.push_back("NA");
                    row.push_back("NA");
                }
            }
            t5.rows.push_back(row);
        };
        for (const auto& [agent, cols] : agent_cols)
            add_row("Agent #" + std::to_string(agent),
                    [&](std::size_t i, std::size_t c) {
                        const auto r = cand_rows[i];
                        return cand.missing(r, cols[c]) ? std::nan("") : static_cast<double>(cand.at(r, cols[c]));
                    },
                    cols.size());
        add_row("Consolidated Criteria",
                [&](std::size_t i, std::size_t c) {
                    const auto r = rows[i];
                    return scores.missing(r, c) ? std::nan("") : static_cast<double>(scores.at(r, c));
                },
                scores.cols());
        write_table_pair(dir / "table_agents", t5);
        m.add_output("table_agents", dir / "table_agents.csv");
        result.outputs.push_back(dir / "table_agents.csv");
    }
    result.warnings = m.warnings;
    result.manifest = finish_manifest(m, dir / "table_outcomes.csv");
    return result;
}

HumanRatings read_human_ratings(const fs::path& path) {
    require_file(path, "human ratings");
    const CsvTable t = read_csv(path);
    const int id_col = t.column("instance_id"), rater_col = t.column("rater_id");
    if (id_col < 0 || rater_col < 0) throw DataError(path.string() + ": expected instance_id and rater_id columns");
    HumanRatings out;
    std::vector<std::size_t> dim_cols;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (static_cast<int>(c) != id_col && static_cast<int>(c) != rater_col) {
            out.dimensions.push_back(t.header[c]);
            dim_cols.push_back(c);
        }
    if (out.dimensions.empty()) throw DataError(path.string() + ": no dimension columns");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = path.string() + " line " + std::to_string(t.line_numbers[r]);
        const std::string& rater = row[static_cast<std::size_t>(rater_col)];
        const std::string& id = row[static_cast<std::size_t>(id_col)];
        if (rater.empty() || id.empty()) throw DataError(where + ": empty instance_id or rater_id");
        std::vector<int> vals;
        for (auto c : dim_cols) {
            const std::string cell = trim(row[c]);
            if (cell.size() != 1 || cell[0] < '1' || cell[0] > '5')
                throw DataError(where + ": invalid score \"" + row[c] + "\" for " + t.header[c] + " (expected 1..5)");
            vals.push_back(cell[0] - '0');
        }
        if (!out.scores.count(rater)) out.raters.push_back(rater);
        if (!out.scores[rater].emplace(id, std::move(vals)).second)
            throw DataError(where + ": rater " + rater + " rated instance " + id + " twice");
    }
    return out;
}

int rounded_mean(const std::vector<int>& values) {
    if (values.empty()) throw std::invalid_argument("rounded_mean: no values");
    long sum = 0;
    for (int v : values) sum += v;
    const auto n = static_cast<long>(values.size());
    // floor(sum / n + 1/2) in integer arithmetic
    return static_cast<int>((2 * sum + n) / (2 * n));
}

CommandResult cmd_agreement(const PipelineConfig& config, const AgreementArgs& args, std::ostream& log) {
    config.validate();
    const ScoreMatrix run1 = load_scores(args.run1, "AI run 1 scores");
    const ScoreMatrix run2 = load_scores(args.run2, "AI run 2 scores");
    const HumanRatings human = read_human_ratings(args.human);
    const fs::path out = output_file(config, args.output, "agreement.csv");
    RunManifest m = start_manifest(config, "agreement");
    m.add_input("run1", args.run1);
    m.add_input("run2", args.run2);
    m.add_input("human", args.human);
    if (human.raters.size() < 2) throw DataError(args.human.string() + ": at least two raters are required");
    if (human.raters.size() > 2)
        m.warnings.push_back("more than two raters; Human-Human uses " + human.raters[0] + " and " + human.raters[1]);
    const auto replicates = static_cast<std::size_t>(config.agreement.bootstrap_replicates);
    const auto ai_ai = judge::matrix_agreement(run1, run2, replicates, config.agreement.seed);

    std::unordered_map<std::string, std::size_t> ai_row;
    for (std::size_t r = 0; r < run1.rows(); ++r) ai_row.emplace(run1.instance_ids()[r], r);
    std::set<std::string> rated;
    for (const auto& [rater, by_id] : human.scores)
        for (const auto& [id, _] : by_id) rated.insert(id);
    for (const auto& id : rated)
        if (!ai_row.count(id)) throw DataError("instance " + id + " is rated by humans but missing from " + args.run1.string());

    auto estimate = [&](const std::vector<int>& a, const std::vector<int>& b, std::uint64_t seed,
                        const std::string& what) -> std::optional<stats::KappaEstimate> {
        if (a.empty()) {
            m.warnings.push_back(what + ": no shared instances");
            return std::nullopt;
        }
        try {
            return stats::bootstrap_kappa_ci(a, b, 5, replicates, seed);
        } catch (const DegenerateError& e) {
            m.warnings.push_back(what + ": " + e.what());
            return std::nullopt;
        }
    };
    auto cells = [](const std::optional<stats::KappaEstimate>& k) -> std::vector<std::string> {
        if (!k) return {"NA", "NA", "NA", "0"};
        return {fixed(k->kappa, 2), fixed(k->ci_low, 2), fixed(k->ci_high, 2), std::to_string(k->n_items)};
    };

    CsvTable t;
    t.header = {"dimension", "human_human_kappa", "human_human_ci_low", "human_human_ci_high", "human_human_n",
                "ai_ai_kappa",  "ai_ai_ci_low",       "ai_ai_ci_high",       "ai_ai_n",
                "human_ai_kappa", "human_ai_ci_low",  "human_ai_ci_high",    "human_ai_n"};
    const auto& r1 = human.scores.at(human.raters[0]);
    const auto& r2 = human.scores.at(human.raters[1]);
    for (std::size_t d = 0; d < run1.cols(); ++d) {
        const auto& dim = run1.dimension_ids()[d];
        const auto hd_it = std::find(human.dimensions.begin(), human.dimensions.end(), dim);
        if (hd_it == human.dimensions.end()) throw DataError(args.human.string() + ": no column for dimension " + dim);
        const auto hd = static_cast<std::size_t>(hd_it - human.dimensions.begin());
        std::vector<int> hh1, hh2, ha_h, ha_ai;
        for (const auto& [id, v1] : r1) {
            const auto it = r2.find(id);
            if (it == r2.end()) continue;
            hh1.push_back(v1[hd]);
            hh2.push_back(it->second[hd]);
        }
        for (const auto& id : rated) {
            const auto r = ai_row.at(id);
            if (run1.missing(r, d)) continue;
            std::vector<int> vals;
            for (const auto& rater : human.raters) {
                const auto& by_id = human.scores.at(rater);
                if (auto it = by_id.find(id); it != by_id.end()) vals.push_back(it->second[hd]);
            }
            ha_h.push_back(rounded_mean(vals));
            ha_ai.push_back(run1.at(r, d));
        }
        CsvRow row{dim};
        for (const auto& c : cells(estimate(hh1, hh2, derive_seed(config.agreement.seed, "human-human", d), dim + " Human-Human")))
            row.push_back(c);
        const auto ai_it = std::find_if(ai_ai.begin(), ai_ai.end(), [&](const auto& a) { return a.dimension == dim; });
        for (const auto& c : cells(ai_it == ai_ai.end() ? std::nullopt : std::optional(ai_it->estimate))) row.push_back(c);
        for (const auto& c : cells(estimate(ha_h, ha_ai, derive_seed(config.agreement.seed, "human-ai", d), dim + " Human-AI")))
            row.push_back(c);
        t.rows.push_back(row);
    }
    write_table_pair(out.parent_path() / out.stem(), t);
    m.add_output("agreement", out);
    log << "agreement: " << t.rows.size() << " dimensions -> " << out.string() << "\n";
    CommandResult result;
    result.outputs = {out};
    result.warnings = m.warnings;
    result.manifest = finish_manifest(m, out);
    return result;
}

CommandResult cmd_associate(const PipelineConfig& config, const AssociateArgs& args, std::ostream& log) {
    config.validate();
    const auto outcome = outcome_from_key(args.outcome);
    if (!outcome) {
        std::string known;
        for (Outcome o : kOutcomes) known += std::string(known.empty() ? "" : ", ") + outcome_key(o);
        throw ConfigError("unknown outcome \"" + args.outcome + "\" (expected one of " + known + ")");
    }
    const Corpus corpus = load_checked_corpus(args.corpus);
    const ScoreMatrix scores = load_scores(args.scores, "scores");
    const fs::path out = output_file(config, args.output, "rate_ratios-" + args.outcome + ".csv");
    RunManifest m = start_manifest(config, "associate");
    m.add_input("scores", args.scores);
    m.add_input("corpus", args.corpus);
    m.corpus_digest = corpus_digest(corpus);
    const auto labels = corpus.labels(*outcome);
    const auto rows = align_rows(scores, corpus, args.scores.string());
    std::vector<std::size_t> kept_rows;
    std::vector<double> y;
    std::vector<std::string> groups;
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!scores.row_complete(rows[i])) continue;
        kept_rows.push_back(rows[i]);
        y.push_back(labels[i]);
        groups.push_back(corpus.instances[i].case_id);
        distinct.insert(corpus.instances[i].case_id);
    }
    if (kept_rows.size() < corpus.size())
        m.warnings.push_back(std::to_string(corpus.size() - kept_rows.size()) + " instances with masked scores excluded");
    if (distinct.size() < 2) throw DegenerateError("the random intercept needs at least two cases");
    stats::GlmmOptions opts;
    opts.standardize = config.association.standardize;
    opts.robust_covariance = config.association.robust_covariance;
    opts.max_iterations = config.association.max_iterations;
    const auto fit = stats::fit_poisson_glmm(y, score_features(scores, kept_rows), groups, opts);
    for (const auto& w : fit.warnings) m.warnings.push_back(w);
    if (!fit.converged) m.warnings.push_back("GLMM did not converge; estimates are provisional");
    const auto table = stats::rate_ratio_table(fit, scores.dimension_ids());
    CsvTable t;
    t.header = {"dimension", "rate_ratio", "ci_low", "ci_high", "beta", "std_error", "p_value"};
    for (const auto& r : table)
        t.rows.push_back({r.dimension, fixed(r.rate_ratio, 3), fixed(r.ci_low, 3), fixed(r.ci_high, 3), fixed(r.beta),
                          fixed(r.std_error), fixed(r.p_value)});
    write_table_pair(out.parent_path() / out.stem(), t);
    ordered_json fj;
    fj["outcome"] = args.outcome;
    fj["sigma"] = fit.sigma;
    fj["log_likelihood"] = fit.log_likelihood;
    fj["converged"] = fit.converged;
    fj["boundary"] = fit.boundary;
    fj["identifiable"] = fit.identifiable;
    fj["iterations"] = fit.iterations;
    fj["n_groups"] = fit.n_groups;
    fj["n_obs"] = fit.n_obs;
    fj["standardized"] = opts.standardize;
    fj["robust_covariance"] = opts.robust_covariance;
    fj["intercept"] = fit.beta(0);
    fj["warnings"] = fit.warnings;
    const fs::path fit_path = out.parent_path() / (out.stem().string() + ".fit.json");
    write_text_file_atomic(fit_path, fj.dump(2) + "\n");
    m.add_output("rate_ratios", out);
    m.add_output("fit", fit_path);
    log << "associate: " << args.outcome << ", " << fit.n_obs << " instances in " << fit.n_groups
        << " cases, sigma " << fixed(fit.sigma, 3) << " -> " << out.string() << "\n";
    CommandResult result;
    result.outputs = {out, fit_path};
    result.warnings = m.warnings;
    result.manifest = finish_manifest(m, out);
    return result;
}

CommandResult cmd_stability(const PipelineConfig& config, const StabilityArgs& args, std::ostream& log) {
    config.validate();
    if (args.rubrics.size() < 2) throw DataError("stability needs at least two rubrics");
    std::vector<Rubric> rubrics;
    for (const auto& p : args.rubrics) {
        require_file(p, "rubric");
        rubrics.push_back(read_rubric(p));
    }
    fs::path disc_path = args.discovery;
    if (disc_path.empty()) {
        const auto& first = rubrics.front();
        if (first.manifest.empty())
            throw DataError(args.rubrics.front().string() + " names no manifest; pass the discovery file explicitly");
        const fs::path mp = args.rubrics.front().parent_path() / first.manifest;
        require_file(mp, "rubric manifest");
        const auto man = read_manifest(mp);
        const auto it = man.inputs.find("discovery");
        if (it == man.inputs.end()) throw DataError(mp.string() + " records no discovery input");
        disc_path = it->second.path;
    }
    require_file(disc_path, "discovery file");
    const auto disc = discovery::read_discovery(disc_path);
    const auto brainstorm = stability::candidate_texts(disc.criteria());
    if (brainstorm.empty()) throw DataError(disc_path.string() + ": no brainstormed criteria");

    const fs::path out = output_file(config, args.output, "stability.json");
    Backends backends(config);
    auto& embedder = backends.embedder();
    RunManifest m = start_manifest(config, "stability");
    for (std::size_t i = 0; i < args.rubrics.size(); ++i) m.add_input("rubric-" + std::to_string(i + 1), args.rubrics[i]);
    m.add_input("discovery", disc_path);

    const auto drift = stability::cross_seed_drift(embedder, rubrics, config.stability.drift_threshold);
    ordered_json j;
    j["drift"] = {{"overall_mean_distance", drift.overall},
                  {"per_index", drift.per_index},
                  {"seed_pairs", drift.seed_pairs},
                  {"rubrics", drift.rubrics},
                  {"threshold", drift.threshold},
                  {"below_threshold", drift.below_threshold},
                  {"verdict", std::string(drift.below_threshold ? "below" : "at or above") + " " +
                                  format_double(drift.threshold) + " threshold"}};
    CsvTable sweep;
    sweep.header = {"threshold"};
    ordered_json cov = ordered_json::array();
    std::vector<std::vector<stability::CoverageReport>> sweeps;
    for (std::size_t i = 0; i < rubrics.size(); ++i) {
        const auto sims = stability::term_similarities(embedder, brainstorm, rubrics[i]);
        const auto c = stability::coverage_at(sims, config.stability.coverage_threshold);
        cov.push_back({{"rubric", args.rubrics[i].filename().string()},
                       {"covered_terms", c.covered_terms},
                       {"total_terms", c.total_terms},
                       {"coverage_fraction", c.coverage_fraction},
                       {"similarity_threshold", c.similarity_threshold},
                       {"counting", c.counting}});
        sweeps.push_back(stability::coverage_sweep(sims, config.stability.sweep));
        sweep.header.push_back(args.rubrics[i].filename().string());
    }
    for (std::size_t s = 0; s < config.stability.sweep.size(); ++s) {
        CsvRow row{format_double(config.stability.sweep[s])};
        for (const auto& sw : sweeps) row.push_back(fixed(sw[s].coverage_fraction));
        sweep.rows.push_back(row);
    }
    j["coverage"] = cov;
    j["coverage_note"] = "coverage counts distinct n-gram types (orders 1-3)";
    write_text_file_atomic(out, j.dump(2) + "\n");
    CsvTable per;
    per.header = {"cluster_index", "mean_cosine_distance"};
    for (std::size_t i = 0; i < drift.per_index.size(); ++i)
        per.rows.push_back({std::to_string(i + 1), fixed(drift.per_index[i], 6)});
    const fs::path stem = out.parent_path() / out.stem();
    write_table_pair(stem.string() + "_drift", per);
    write_table_pair(stem.string() + "_sweep", sweep);
    m.add_output("stability", out);
    m.add_output("drift", stem.string() + "_drift.csv");
    m.add_output("sweep", stem.string() + "_sweep.csv");
    log << "stability: drift " << fixed(drift.overall, 4) << " (" << j["drift"]["verdict"].get<std::string>()
        << "), coverage " << fixed(cov[0]["coverage_fraction"].get<double>(), 3) << " -> " << out.string() << "\n";
    CommandResult result;
    result.outputs = {out, stem.string() + "_drift.csv", stem.string() + "_sweep.csv"};
    result.manifest = finish_manifest(m, out);
    return result;
}

CommandResult cmd_synth(const PipelineConfig& config, const SynthArgs& args, std::ostream& log) {
    config.validate();
    if (args.spec.empty()) throw ConfigError("synthetic spec path is required");
    if (!fs::exists(args.spec)) throw ConfigError("synthetic spec not found: " + args.spec.string());
    const auto spec = parse_synthetic_spec(read_text_file(args.spec));
    spec.validate();
    const fs::path dir = output_dir_of(config, args.output_dir);
    const auto data = generate_synthetic_corpus(spec, args.seed);
    const fs::path corpus_path = dir / "corpus.jsonl", scores_path = dir / "planted_scores.csv",
                   truth_path = dir / "truth.json";
    write_corpus(corpus_path, data.corpus);
    write_score_matrix(scores_path, data.planted);
    write_text_file_atomic(truth_path, format_synthetic_truth(spec, data, args.seed));
    RunManifest m = start_manifest(config, "synth");
    m.add_input("spec", args.spec);
    m.counters["seed"] = std::to_string(args.seed);
    m.corpus_digest = corpus_digest(data.corpus);
    m.add_output("corpus", corpus_path);
    m.add_output("planted_scores", scores_path);
    m.add_output("truth", truth_path);
    log << "synth: " << data.corpus.size() << " instances -> " << dir.string() << "\n";
    CommandResult result;
    result.outputs = {corpus_path, scores_path, mask_path_for(scores_path), truth_path};
    result.manifest = finish_manifest(m, corpus_path);
    return result;
}

CommandResult cmd_summarize(const PipelineConfig& config, const SummarizeArgs& args, std::ostream& log) {
    const Corpus corpus = load_checked_corpus(args.corpus);
    const fs::path stem = args.output.empty() ? output_dir_of(config, {}) / "corpus_summary" : args.output;
    if (stem.has_parent_path()) ensure_dir(stem.parent_path());
    const CsvTable t = summary_table(summarize_corpus(corpus));
    write_table_pair(stem, t);
    log << format_aligned(t);
    RunManifest m = start_manifest(config, "summarize");
    m.add_input("corpus", args.corpus);
    m.corpus_digest = corpus_digest(corpus);
    m.add_output("summary", stem.string() + ".csv");
    CommandResult result;
    result.outputs = {stem.string() + ".csv", stem.string() + ".txt"};
    result.manifest = finish_manifest(m, stem.string() + ".csv");
    return result;
}

CommandResult cmd_calibration_sample(const PipelineConfig& config, const CalibrationArgs& args, std::ostream& log) {
    const ScoreMatrix scores = load_scores(args.scores, "scores");
    std::optional<Corpus> corpus;
    if (!args.corpus.empty()) corpus = load_checked_corpus(args.corpus);
    const fs::path out = output_file(config, args.output, "calibration_sample.csv");
    const auto items = stratified_calibration_sample(scores, scores.cols(), args.seed);
    CsvTable t;
    t.header = {"instance_id", "dimension", "stratum", "ai_score"};
    if (corpus) t.header.push_back("text");
    for (const auto& it : items) {
        const auto r = *scores.row_of(it.instance_id);
        CsvRow row{it.instance_id, scores.dimension_ids()[it.dimension], it.stratum,
                   std::to_string(scores.at(r, it.dimension))};
        if (corpus) {
            const auto idx = corpus->index_of(it.instance_id);
            row.push_back(idx ? corpus->instances[*idx].text : "");
        }
        t.rows.push_back(row);
    }
    write_csv(out, t);
    log << "calibration-sample: " << items.size() << " items -> " << out.string() << "\n";
    RunManifest m = start_manifest(config, "calibration-sample");
    m.add_input("scores", args.scores);
    if (corpus) m.add_input("corpus", args.corpus);
    m.counters["seed"] = std::to_string(args.seed);
    m.add_output("sample", out);
    CommandResult result;
    result.outputs = {out};
    result.manifest = finish_manifest(m, out);
    return result;
}

CommandResult cmd_merge_anchors(const PipelineConfig& config, const MergeAnchorsArgs& args, std::ostream& log) {
    require_file(args.rubric, "rubric");
    require_file(args.additions, "calibration additions");
    const Rubric rubric = read_rubric(args.rubric);
    const auto additions = consolidation::read_calibration_additions(args.additions);
    const auto report = consolidation::merge_calibration_examples(rubric, additions);
    const fs::path out = output_file(config, args.output, "rubric-calibrated.json");
    write_rubric(out, report.rubric);
    CsvTable rej;
    rej.header = {"dimension", "level", "text", "reason"};
    for (const auto& r : report.rejected)
        rej.rows.push_back({r.addition.dimension, std::to_string(r.addition.level), r.addition.text, r.reason});
    const fs::path rej_path = out.parent_path() / (out.stem().string() + ".rejected.csv");
    write_csv(rej_path, rej);
    log << "merge-anchors: " << report.accepted << " accepted, " << report.rejected.size() << " rejected -> "
        << out.string() << "\n";
    RunManifest m = start_manifest(config, "merge-anchors");
    m.add_input("rubric", args.rubric);
    m.add_input("additions", args.additions);
    m.add_output("rubric", out);
    m.add_output("rejected", rej_path);
    m.rubric_digest = sha256_file(out);
    CommandResult result;
    result.outputs = {out, rej_path};
    result.manifest = finish_manifest(m, out);
    return result;
}

} // namespace rubricforge::pipeline
