#include "rubricforge/llm/types.hpp"

#include "rubricforge/util/hash.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace rubricforge::llm {

using nlohmann::ordered_json;

const char* to_string(Role role) { return role == Role::System ? "system" : "user"; }

void CompletionRequest::validate() const {
    if (messages.empty()) throw std::invalid_argument("completion request has no messages");
    for (const auto& m : messages)
        if (m.content.empty()) throw std::invalid_argument("completion request has an empty message");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw std::invalid_argument("temperature must be in [0, 2]");
    if (max_tokens && *max_tokens < 1) throw std::invalid_argument("max_tokens must be positive");
}

namespace {

ordered_json messages_json(const std::vector<ChatMessage>& messages) {
    ordered_json arr = ordered_json::array();
    for (const auto& m : messages) arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return arr;
}

} // namespace

std::string canonical_request_json(const std::string& backend_id, const CompletionRequest& request) {
    ordered_json j;
    j["backend_id"] = backend_id;
    j["model_id"] = request.model_id;
    j["temperature"] = request.temperature;
    j["max_tokens"] = request.max_tokens ? ordered_json(*request.max_tokens) : ordered_json(nullptr);
    j["messages"] = messages_json(request.messages);
    j["replicate_tag"] = request.replicate_tag;
    return j.dump();
}

std::string cache_key(const std::string& backend_id, const CompletionRequest& request) {
    return sha256_hex(canonical_request_json(backend_id, request));
}

std::string prompt_fingerprint(const std::vector<ChatMessage>& messages) {
    return sha256_hex(messages_json(messages).dump());
}

} // namespace rubricforge::llm
