#include "rubricforge/llm/openai.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

namespace rubricforge::llm {

using nlohmann::json;

void OpenAiSettings::apply_environment() {
    for (const char* k : {"RUBRICFORGE_API_KEY", "OPENAI_API_KEY"}) {
        if (const char* v = std::getenv(k); v && *v) {
            api_key = v;
            break;
        }
    }
    for (const char* k : {"RUBRICFORGE_BASE_URL", "OPENAI_BASE_URL"}) {
        if (const char* v = std::getenv(k); v && *v) {
            base_url = v;
            break;
        }
    }
}

ParsedUrl parse_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base url must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

namespace {

json post_json(const OpenAiSettings& settings, const ParsedUrl& url, const std::string& endpoint, const json& body) {
    httplib::Client client(url.origin);
    const auto secs = static_cast<time_t>(settings.timeout_seconds);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (!settings.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings.api_key);
    auto res = client.Post(url.path + endpoint, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request to " + url.origin + url.path + endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + endpoint, res->status);
    if (res->status != 200)
        throw BackendError("HTTP " + std::to_string(res->status) + " from " + endpoint + ": " + res->body.substr(0, 500));
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed JSON from ") + endpoint + ": " + e.what());
    }
}

} // namespace

OpenAiBackend::OpenAiBackend(OpenAiSettings settings) : settings_(std::move(settings)), url_(parse_base_url(settings_.base_url)) {}

CompletionResponse OpenAiBackend::complete(const CompletionRequest& request) {
    json body;
    body["model"] = request.model_id;
    body["temperature"] = request.temperature;
    json msgs = json::array();
    for (const auto& m : request.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    body["messages"] = msgs;
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
    const json j = post_json(settings_, url_, "/chat/completions", body);
    CompletionResponse r;
    r.backend_id = id();
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw ProtocolError("chat completion content is not a string");
        r.text = content.get<std::string>();
        if (j.contains("usage") && j["usage"].is_object()) {
            TokenUsage u;
            u.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
            u.completion_tokens = j["usage"].value("completion_tokens", 0LL);
            r.usage = u;
        }
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("unexpected chat completion payload: ") + e.what());
    }
    r.raw = j.dump();
    return r;
}

OpenAiEmbeddingBackend::OpenAiEmbeddingBackend(OpenAiSettings settings, std::size_t dimension)
    : settings_(std::move(settings)), url_(parse_base_url(settings_.base_url)), dimension_(dimension) {}

std::vector<std::vector<double>> OpenAiEmbeddingBackend::embed(const std::vector<std::string>& texts) {
    json body;
    body["model"] = settings_.embedding_model;
    body["input"] = texts;
    const json j = post_json(settings_, url_, "/embeddings", body);
    std::vector<std::vector<double>> out(texts.size());
    try {
        const auto& data = j.at("data");
        if (data.size() != texts.size()) throw ProtocolError("embedding count mismatch");
        for (std::size_t k = 0; k < data.size(); ++k) {
            const auto& item = data[k];
            const std::size_t idx = item.contains("index") ? item["index"].get<std::size_t>() : k;
            if (idx >= out.size()) throw ProtocolError("embedding index out of range");
            out[idx] = item.at("embedding").get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("unexpected embeddings payload: ") + e.what());
    }
    if (dimension_ == 0 && !out.empty()) dimension_ = out.front().size();
    return out;
}

} // namespace rubricforge::llm
