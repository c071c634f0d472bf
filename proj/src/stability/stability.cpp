#include "rubricforge/stability/stability.hpp"

#include "rubricforge/util/io.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace rubricforge::stability {

DriftReport cross_seed_drift(llm::EmbeddingClient& embedder, const std::vector<Rubric>& rubrics, double threshold) {
    if (rubrics.size() < 2) throw DataError("drift needs at least two rubrics");
    const std::size_t k = rubrics.front().size();
    if (k == 0) throw DataError("drift needs nonempty rubrics");
    for (std::size_t r = 1; r < rubrics.size(); ++r)
        if (rubrics[r].size() != k)
            throw DataError("rubric " + std::to_string(r + 1) + " has " + std::to_string(rubrics[r].size()) +
                            " dimensions; expected " + std::to_string(k));
    std::vector<std::string> texts;
    for (const auto& rb : rubrics)
        for (const auto& d : rb.dimensions) texts.push_back(d.definition);
    const auto vecs = embedder.embed(texts);
    DriftReport out;
    out.rubrics = rubrics.size();
    out.threshold = threshold;
    out.per_index.assign(k, 0.0);
    double total = 0.0;
    std::size_t pairs_per_index = 0;
    for (std::size_t a = 0; a < rubrics.size(); ++a)
        for (std::size_t b = a + 1; b < rubrics.size(); ++b) {
            ++pairs_per_index;
            for (std::size_t i = 0; i < k; ++i) {
                const double dist = std::clamp(1.0 - llm::cosine_similarity(vecs[a * k + i], vecs[b * k + i]), 0.0, 2.0);
                out.per_index[i] += dist;
                total += dist;
            }
        }
    for (auto& v : out.per_index) v /= static_cast<double>(pairs_per_index);
    out.seed_pairs = pairs_per_index;
    out.overall = total / static_cast<double>(pairs_per_index * k);
    out.below_threshold = out.overall < threshold;
    return out;
}

std::vector<std::string> ngrams(std::string_view text, const std::vector<int>& orders) {
    std::vector<std::string> tokens;
    for (const auto& raw : split_whitespace(text)) {
        std::string t;
        for (char ch : raw)
            if (!std::ispunct(static_cast<unsigned char>(ch))) t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (!t.empty()) tokens.push_back(std::move(t));
    }
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (int order : orders) {
        if (order < 1) throw std::invalid_argument("ngrams: orders must be positive");
        const auto n = static_cast<std::size_t>(order);
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string g = tokens[i];
            for (std::size_t j = 1; j < n; ++j) g += " " + tokens[i + j];
            if (seen.insert(g).second) out.push_back(std::move(g));
        }
    }
    return out;
}

std::vector<std::string> rubric_texts(const Rubric& rubric) {
    std::vector<std::string> out;
    for (const auto& d : rubric.dimensions) {
        out.push_back(d.name);
        out.push_back(d.definition);
        for (const auto& a : d.anchors) out.push_back(a.description);
    }
    return out;
}

std::vector<std::string> candidate_texts(const std::vector<CandidateCriterion>& criteria) {
    std::vector<std::string> out;
    for (const auto& c : criteria) {
        out.push_back(c.name);
        out.push_back(c.definition);
        for (const auto& a : c.anchors) out.push_back(a);
    }
    return out;
}

namespace {

std::vector<std::string> terms_of(const std::vector<std::string>& texts) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& t : texts)
        for (auto& g : ngrams(t))
            if (seen.insert(g).second) out.push_back(std::move(g));
    return out;
}

} // namespace

TermSimilarities term_similarities(llm::EmbeddingClient& embedder, const std::vector<std::string>& brainstorm_texts,
                                   const Rubric& rubric) {
    if (brainstorm_texts.empty()) throw std::invalid_argument("vocabulary_coverage: no brainstorm texts");
    TermSimilarities out;
    out.brainstorm_terms = terms_of(brainstorm_texts);
    out.rubric_terms = terms_of(rubric_texts(rubric));
    out.best.assign(out.brainstorm_terms.size(), -1.0);
    if (out.brainstorm_terms.empty() || out.rubric_terms.empty()) return out;
    const auto bv = embedder.embed(out.brainstorm_terms);
    const auto rv = embedder.embed(out.rubric_terms);
    for (std::size_t i = 0; i < bv.size(); ++i)
        for (const auto& r : rv) out.best[i] = std::max(out.best[i], llm::cosine_similarity(bv[i], r));
    return out;
}

CoverageReport coverage_at(const TermSimilarities& sims, double threshold) {
    CoverageReport out;
    out.similarity_threshold = threshold;
    out.total_terms = sims.brainstorm_terms.size();
    for (double s : sims.best)
        if (s >= threshold) ++out.covered_terms;
    out.coverage_fraction =
        out.total_terms == 0 ? 0.0 : static_cast<double>(out.covered_terms) / static_cast<double>(out.total_terms);
    return out;
}

CoverageReport vocabulary_coverage(llm::EmbeddingClient& embedder, const std::vector<std::string>& brainstorm_texts,
                                   const Rubric& rubric, double threshold) {
    return coverage_at(term_similarities(embedder, brainstorm_texts, rubric), threshold);
}

std::vector<CoverageReport> coverage_sweep(const TermSimilarities& sims, const std::vector<double>& thresholds) {
    std::vector<CoverageReport> out;
    for (double t : thresholds) out.push_back(coverage_at(sims, t));
    return out;
}

} // namespace rubricforge::stability
