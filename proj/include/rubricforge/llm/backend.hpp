#pragma once

#include "rubricforge/llm/types.hpp"

#include <string>
#include <vector>

namespace rubricforge::llm {

// Chat-completion backend. Implementations must be safe to call from
// several threads at once.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string id() const = 0;
    // Throws TransportError for retryable failures and ProtocolError for
    // malformed payloads.
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// Embedding backend returning one unit-norm vector of fixed dimension per
// input text. Thread-safe.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

} // namespace rubricforge::llm
