#pragma once

#include "rubricforge/llm/backend.hpp"

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace rubricforge::llm {

// One unit vector per text. Throws std::invalid_argument on an empty list and
// ProtocolError if the backend returns the wrong count, a wrong dimension or
// a zero vector. Vectors are renormalized to unit length.
std::vector<std::vector<double>> embed(EmbeddingBackend& backend, const std::vector<std::string>& texts);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Memoizing front end: distinct texts are embedded once, in batches.
class EmbeddingClient {
public:
    explicit EmbeddingClient(EmbeddingBackend& backend, std::size_t batch_size = 256)
        : backend_(backend), batch_size_(batch_size) {}

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);
    std::size_t backend_texts() const;  // texts actually sent to the backend
    EmbeddingBackend& backend() { return backend_; }

private:
    EmbeddingBackend& backend_;
    std::size_t batch_size_;
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<double>> memo_;
    std::size_t sent_ = 0;
};

} // namespace rubricforge::llm
