#include "rubricforge/llm/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace rubricforge::llm {

std::vector<std::vector<double>> embed(EmbeddingBackend& backend, const std::vector<std::string>& texts) {
    if (texts.empty()) throw std::invalid_argument("embed: no texts");
    auto out = backend.embed(texts);
    if (out.size() != texts.size())
        throw ProtocolError("embedding backend returned " + std::to_string(out.size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts");
    const std::size_t d = backend.dimension();
    for (auto& v : out) {
        if (d != 0 && v.size() != d) throw ProtocolError("embedding dimension mismatch");
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm)) throw ProtocolError("embedding backend returned a zero vector");
        for (double& x : v) x /= norm;
    }
    return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
    if (a == b) return 1.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<std::vector<double>> EmbeddingClient::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw std::invalid_argument("embed: no texts");
    std::vector<std::string> todo;
    {
        std::lock_guard lock(mutex_);
        std::set<std::string> pending;
        for (const auto& t : texts)
            if (!memo_.count(t) && pending.insert(t).second) todo.push_back(t);
    }
    for (std::size_t start = 0; start < todo.size(); start += batch_size_) {
        const std::vector<std::string> batch(todo.begin() + static_cast<std::ptrdiff_t>(start),
                                             todo.begin() + static_cast<std::ptrdiff_t>(std::min(todo.size(), start + batch_size_)));
        auto vecs = llm::embed(backend_, batch);
        std::lock_guard lock(mutex_);
        sent_ += batch.size();
        for (std::size_t i = 0; i < batch.size(); ++i) memo_.emplace(batch[i], std::move(vecs[i]));
    }
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    std::lock_guard lock(mutex_);
    for (const auto& t : texts) out.push_back(memo_.at(t));
    return out;
}

std::size_t EmbeddingClient::backend_texts() const {
    std::lock_guard lock(mutex_);
    return sent_;
}

} // namespace rubricforge::llm
