#pragma once

#include "rubricforge/llm/backend.hpp"

#include <memory>
#include <string>

namespace rubricforge::llm {

struct OpenAiSettings {
    // e.g. https://api.openai.com/v1 ; requests go to <base>/chat/completions
    // and <base>/embeddings.
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string embedding_model = "text-embedding-3-small";
    double timeout_seconds = 120.0;

    // Fills api_key and base_url from RUBRICFORGE_API_KEY / OPENAI_API_KEY and
    // RUBRICFORGE_BASE_URL / OPENAI_BASE_URL when set.
    void apply_environment();
};

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

ParsedUrl parse_base_url(const std::string& url);

// Chat-completions client for OpenAI-compatible servers. HTTP 429 and 5xx
// and connection failures raise TransportError; other non-200 statuses raise
// BackendError; unparseable bodies raise ProtocolError.
class OpenAiBackend : public CompletionBackend {
public:
    explicit OpenAiBackend(OpenAiSettings settings);
    std::string id() const override { return "openai:" + settings_.base_url; }
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    OpenAiSettings settings_;
    ParsedUrl url_;
};

class OpenAiEmbeddingBackend : public EmbeddingBackend {
public:
    explicit OpenAiEmbeddingBackend(OpenAiSettings settings, std::size_t dimension = 0);
    std::string id() const override { return "openai-embedding:" + settings_.embedding_model; }
    // 0 until the first response when not configured.
    std::size_t dimension() const override { return dimension_; }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    OpenAiSettings settings_;
    ParsedUrl url_;
    std::size_t dimension_;
};

} // namespace rubricforge::llm
