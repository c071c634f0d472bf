#include "rubricforge/consolidation/consolidation.hpp"

#include "rubricforge/llm/parsers.hpp"
#include "rubricforge/llm/prompts.hpp"
#include "rubricforge/stats/ranks.hpp"
#include "rubricforge/util/csv.hpp"
#include "rubricforge/util/io.hpp"
#include "rubricforge/util/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace rubricforge::consolidation {

judge::ScoringRun score_candidates(llm::LlmClient& client, const Corpus& corpus,
                                   const std::vector<CandidateCriterion>& criteria,
                                   const judge::JudgeOptions& options, const std::string& replicate_tag) {
    if (criteria.empty()) throw std::invalid_argument("score_candidates: no criteria");
    std::vector<std::string> ids, cases, refs;
    for (const auto& inst : corpus.instances) {
        ids.push_back(inst.id);
        cases.push_back(inst.case_id);
    }
    for (const auto& c : criteria) refs.push_back(c.ref());
    judge::ScoringRun out{ScoreMatrix(ids, cases, refs), {}, replicate_tag};

    std::map<int, std::vector<std::size_t>> by_agent;
    for (std::size_t j = 0; j < criteria.size(); ++j) by_agent[criteria[j].agent_id].push_back(j);
    for (const auto& [agent, cols] : by_agent) {
        std::vector<CandidateCriterion> group;
        for (auto j : cols) group.push_back(criteria[j]);
        const Rubric rubric = rubric_from_candidates(group);
        judge::ScoringRun run;
        try {
            run = judge::score_corpus(client, rubric, corpus, replicate_tag, options);
        } catch (const DataError& e) {
            throw DataError("scoring criteria of agent " + std::to_string(agent) + ": " + e.what());
        }
        for (std::size_t r = 0; r < run.scores.rows(); ++r)
            for (std::size_t k = 0; k < cols.size(); ++k)
                if (!run.scores.missing(r, k)) out.scores.set(r, cols[k], run.scores.at(r, k));
        for (auto& f : run.failures) {
            f.message = "agent " + std::to_string(agent) + " criteria: " + f.message;
            out.failures.push_back(std::move(f));
        }
    }
    return out;
}

CorrelationMatrix spearman_correlation_matrix(const ScoreMatrix& scores, MissingRows missing) {
    const std::size_t p = scores.cols();
    if (p < 2) throw std::invalid_argument("spearman_correlation_matrix: need at least two columns");
    CorrelationMatrix out;
    out.ids = scores.dimension_ids();
    out.rho = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    out.zero_variance.assign(p, false);

    std::vector<bool> listwise_rows(scores.rows(), true);
    if (missing == MissingRows::Listwise)
        for (std::size_t r = 0; r < scores.rows(); ++r) listwise_rows[r] = scores.row_complete(r);

    auto shared = [&](std::size_t a, std::size_t b, std::vector<double>& x, std::vector<double>& y) {
        x.clear();
        y.clear();
        for (std::size_t r = 0; r < scores.rows(); ++r) {
            if (!listwise_rows[r] || scores.missing(r, a) || scores.missing(r, b)) continue;
            x.push_back(scores.at(r, a));
            y.push_back(scores.at(r, b));
        }
    };
    for (std::size_t c = 0; c < p; ++c) {
        std::vector<double> x;
        for (std::size_t r = 0; r < scores.rows(); ++r)
            if (listwise_rows[r] && !scores.missing(r, c)) x.push_back(scores.at(r, c));
        if (x.size() < 2 || stats::sample_sd(x) == 0.0) {
            out.zero_variance[c] = true;
            out.warnings.push_back("column " + out.ids[c] + " has zero variance; its correlations are set to 0");
        }
    }
    std::vector<double> x, y;
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            shared(a, b, x, y);
            if (x.size() < 3)
                throw DegenerateError("columns " + out.ids[a] + " and " + out.ids[b] + " share " +
                                      std::to_string(x.size()) + " unmasked rows; at least 3 are required");
            double rho = 0.0;
            if (!out.zero_variance[a] && !out.zero_variance[b]) {
                try {
                    rho = stats::spearman_rho(x, y);
                } catch (const DegenerateError&) {
                    // constant over the shared rows only
                    out.warnings.push_back("columns " + out.ids[a] + " and " + out.ids[b] +
                                           " are constant on their shared rows; correlation set to 0");
                }
            }
            out.rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rho;
            out.rho(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = rho;
        }
    }
    return out;
}

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& features) {
    const auto n = features.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (features.row(i) - features.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    return d;
}

Dendrogram single_linkage(const Eigen::MatrixXd& distances) {
    const auto n = static_cast<std::size_t>(distances.rows());
    if (n < 2 || distances.cols() != distances.rows()) throw std::invalid_argument("single_linkage: need a square matrix with >= 2 rows");
    Dendrogram out;
    out.n = n;
    // Active clusters: id, smallest member, size; distances between actives.
    struct Active {
        std::size_t id;
        std::size_t min_point;
        std::size_t size;
    };
    std::vector<Active> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back({i, i, 1});
    Eigen::MatrixXd d = distances;
    std::vector<std::size_t> slot(n);  // active index -> row in d
    for (std::size_t i = 0; i < n; ++i) slot[i] = i;
    while (active.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_key{n, n};
        for (std::size_t i = 0; i < active.size(); ++i)
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const double v = d(static_cast<Eigen::Index>(slot[i]), static_cast<Eigen::Index>(slot[j]));
                const std::pair<std::size_t, std::size_t> key = std::minmax(active[i].min_point, active[j].min_point);
                if (v < best || (v == best && key < best_key)) {
                    best = v;
                    best_key = key;
                    bi = i;
                    bj = j;
                }
            }
        Merge m;
        m.left = std::min(active[bi].id, active[bj].id);
        m.right = std::max(active[bi].id, active[bj].id);
        m.height = best;
        m.size = active[bi].size + active[bj].size;
        const auto ri = static_cast<Eigen::Index>(slot[bi]);
        const auto rj = static_cast<Eigen::Index>(slot[bj]);
        for (std::size_t k = 0; k < active.size(); ++k) {
            const auto rk = static_cast<Eigen::Index>(slot[k]);
            const double v = std::min(d(ri, rk), d(rj, rk));
            d(ri, rk) = v;
            d(rk, ri) = v;
        }
        active[bi] = {n + out.merges.size(), std::min(active[bi].min_point, active[bj].min_point), m.size};
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        slot.erase(slot.begin() + static_cast<std::ptrdiff_t>(bj));
        out.merges.push_back(m);
    }
    return out;
}

Dendrogram single_linkage_cluster(const Eigen::MatrixXd& features) {
    return single_linkage(euclidean_distances(features));
}

std::vector<int> cut_dendrogram(const Dendrogram& d, std::size_t k) {
    if (k < 1 || k > d.n) throw std::invalid_argument("cut_dendrogram: k must lie in [1, n]");
    // Union-find over points and merged cluster ids.
    std::vector<std::size_t> parent(2 * d.n);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m < d.n - k; ++m) {
        const std::size_t node = d.n + m;
        parent[find(d.merges[m].left)] = node;
        parent[find(d.merges[m].right)] = node;
    }
    std::map<std::size_t, int> label_of_root;
    std::vector<int> labels(d.n);
    for (std::size_t i = 0; i < d.n; ++i) {
        const auto root = find(i);
        auto it = label_of_root.find(root);
        if (it == label_of_root.end()) it = label_of_root.emplace(root, static_cast<int>(label_of_root.size())).first;
        labels[i] = it->second;
    }
    return labels;
}

double mean_silhouette(const Eigen::MatrixXd& distances, const std::vector<int>& labels) {
    const std::size_t n = labels.size();
    if (static_cast<std::size_t>(distances.rows()) != n) throw std::invalid_argument("mean_silhouette: size mismatch");
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++count[static_cast<std::size_t>(l)];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(labels[i]);
        if (count[own] <= 1) continue;
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum[static_cast<std::size_t>(labels[j])] += distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double a = sum[own] / static_cast<double>(count[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
            if (c != own && count[c] > 0) b = std::min(b, sum[c] / static_cast<double>(count[c]));
        if (!std::isfinite(b)) continue;
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return n == 0 ? 0.0 : total / static_cast<double>(n);
}

std::pair<std::size_t, std::size_t> default_k_range(std::size_t n) {
    if (n < 3) throw DegenerateError("silhouette selection needs at least 3 criteria");
    return {2, std::min<std::size_t>(10, n - 1)};
}

KSelection select_k_by_silhouette(const Dendrogram& d, const Eigen::MatrixXd& distances, std::size_t k_min,
                                  std::size_t k_max) {
    if (d.n < 3) throw DegenerateError("silhouette selection needs at least 3 points");
    if (k_min < 2 || k_max > d.n - 1 || k_min > k_max)
        throw std::invalid_argument("select_k_by_silhouette: k range must lie within [2, n - 1]");
    KSelection out;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const double s = mean_silhouette(distances, cut_dendrogram(d, k));
        out.table.push_back({k, s});
        if (s > best + 1e-12) {
            best = s;
            out.k_best = k;
        }
    }
    return out;
}

Eigen::MatrixXd clustering_distances(const Eigen::MatrixXd& rho, FeatureMode mode) {
    if (mode == FeatureMode::CorrelationRows) return euclidean_distances(rho);
    Eigen::MatrixXd d = (1.0 - rho.array()).matrix();
    d.diagonal().setZero();
    return d;
}

void ConsolidationOptions::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ConfigError("consolidation temperature must lie in [0, 2]");
    if (concurrency < 1) throw ConfigError("consolidation concurrency must be at least 1");
}

Rubric consolidate_clusters(llm::LlmClient& client, const std::vector<std::vector<CandidateCriterion>>& clusters,
                            const ConsolidationOptions& options) {
    options.validate();
    if (clusters.empty()) throw std::invalid_argument("consolidate_clusters: no clusters");
    for (std::size_t c = 0; c < clusters.size(); ++c)
        if (clusters[c].empty()) throw std::invalid_argument("consolidate_clusters: cluster " + std::to_string(c + 1) + " is empty");
    const std::string tag = "consolidation/seed-" + std::to_string(options.seed);
    std::vector<RubricDimension> dims(clusters.size());
    parallel_for(clusters.size(), options.concurrency, [&](std::size_t c) {
        const auto& members = clusters[c];
        const std::string where = "cluster " + std::to_string(c + 1);
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& m : members) pairs.emplace_back(m.name, m.definition);
        llm::CompletionRequest req;
        req.model_id = options.model_id;
        req.temperature = options.temperature;
        req.replicate_tag = tag;
        req.messages = llm::render_consolidation_prompt(pairs);
        llm::ConsolidatedTuple tuple;
        try {
            tuple = llm::parse_consolidated_tuple(client.complete(req).text);
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what(), e.raw());
        }
        req.messages = llm::render_anchor_prompt(tuple.name, tuple.definition, members);
        std::array<std::string, 3> anchors;
        try {
            const auto parsed = llm::parse_criteria_rows(client.complete(req).text);
            const auto& row = parsed.rows.front();
            anchors = {row.anchor1, row.anchor3, row.anchor5};
        } catch (const ParseError& e) {
            throw ParseError(where + " anchors: " + e.what(), e.raw());
        }
        RubricDimension& d = dims[c];
        d.name = tuple.name;
        d.definition = tuple.definition;
        for (std::size_t a = 0; a < 3; ++a) d.anchors[a].description = anchors[a];
        for (const auto& m : members) d.source_cluster.push_back(m.ref());
    });
    Rubric rubric;
    rubric.seed = options.seed;
    std::map<std::string, int> seen;
    for (auto& d : dims) {
        const int n = ++seen[d.name];
        if (n > 1) {
            std::string renamed = d.name + " (" + std::to_string(n) + ")";
            while (seen.count(renamed)) renamed = d.name + " (" + std::to_string(++seen[d.name]) + ")";
            rubric.warnings.push_back("duplicate dimension name \"" + d.name + "\" renamed to \"" + renamed + "\"");
            d.name = renamed;
            seen[renamed] = 1;
        }
        rubric.dimensions.push_back(std::move(d));
    }
    rubric.validate();
    return rubric;
}

std::vector<std::vector<CandidateCriterion>> clusters_from_rubric(const Rubric& rubric) {
    std::vector<std::vector<CandidateCriterion>> out;
    for (std::size_t i = 0; i < rubric.size(); ++i) {
        const auto& d = rubric.dimensions[i];
        CandidateCriterion c;
        c.agent_id = 0;
        c.ordinal = static_cast<int>(i) + 1;
        c.name = d.name;
        c.definition = d.definition;
        for (std::size_t a = 0; a < 3; ++a) c.anchors[a] = d.anchors[a].description;
        out.push_back({c});
    }
    return out;
}

std::vector<std::vector<CandidateCriterion>> group_by_labels(const std::vector<CandidateCriterion>& criteria,
                                                             const std::vector<int>& labels) {
    if (criteria.size() != labels.size()) throw std::invalid_argument("group_by_labels: size mismatch");
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<CandidateCriterion>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < criteria.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(criteria[i]);
    return out;
}

MergeReport merge_calibration_examples(const Rubric& rubric, const std::vector<CalibrationAddition>& additions) {
    MergeReport report{rubric, 0, {}};
    for (const auto& add : additions) {
        const std::size_t slot = anchor_slot(add.level);
        const int d = report.rubric.find(add.dimension);
        if (d < 0) throw DataError("unknown rubric dimension \"" + add.dimension + "\"");
        auto& anchor = report.rubric.dimensions[static_cast<std::size_t>(d)].anchors[slot];
        if (trim(add.text).empty()) {
            report.rejected.push_back({add, "empty example text"});
        } else if (anchor.calibration_examples.size() >= kMaxCalibrationExamples) {
            report.rejected.push_back({add, "anchor already has " + std::to_string(kMaxCalibrationExamples) +
                                                " calibration examples"});
        } else {
            anchor.calibration_examples.push_back(add.text);
            ++report.accepted;
        }
    }
    return report;
}

std::vector<CalibrationAddition> read_calibration_additions(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const int cd = t.column("dimension"), cl = t.column("level"), ct = t.column("text");
    if (cd < 0 || cl < 0 || ct < 0) throw DataError(path.string() + ": expected columns dimension, level, text");
    std::vector<CalibrationAddition> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto where = path.string() + " line " + std::to_string(t.line_numbers[r]);
        CalibrationAddition a;
        a.dimension = row[static_cast<std::size_t>(cd)];
        try {
            std::size_t used = 0;
            a.level = std::stoi(row[static_cast<std::size_t>(cl)], &used);
            if (used != row[static_cast<std::size_t>(cl)].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError(where + ": level must be an integer");
        }
        if (a.level != 1 && a.level != 3 && a.level != 5) throw DataError(where + ": level must be 1, 3 or 5");
        a.text = row[static_cast<std::size_t>(ct)];
        out.push_back(std::move(a));
    }
    return out;
}

ClusteringResult cluster_criteria(const ScoreMatrix& scores, const ClusteringOptions& options) {
    ClusteringResult out;
    const std::size_t n = scores.cols();
    if (n == 0) throw std::invalid_argument("cluster_criteria: no criteria");
    if (n == 1) {
        out.correlation.ids = scores.dimension_ids();
        out.correlation.rho = Eigen::MatrixXd::Identity(1, 1);
        out.correlation.zero_variance = {false};
        out.distances = Eigen::MatrixXd::Zero(1, 1);
        out.dendrogram.n = 1;
        out.labels = {0};
        return out;
    }
    out.correlation = spearman_correlation_matrix(scores, options.missing);
    out.distances = clustering_distances(out.correlation.rho, options.features);
    out.dendrogram = single_linkage(out.distances);
    if (n == 2) {
        out.labels = {0, 1};
        return out;
    }
    auto [lo, hi] = default_k_range(n);
    if (options.k_min) lo = options.k_min;
    if (options.k_max) hi = options.k_max;
    out.selection = select_k_by_silhouette(out.dendrogram, out.distances, lo, hi);
    out.labels = cut_dendrogram(out.dendrogram, out.selection.k_best);
    return out;
}

} // namespace rubricforge::consolidation
