#pragma once

#include "rubricforge/util/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rubricforge::llm {

enum class Role { System, User };

const char* to_string(Role role);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
    std::string model_id;
    double temperature = 0.0;
    std::vector<ChatMessage> messages;
    std::optional<int> max_tokens;
    // Distinguishes repeated runs of otherwise identical requests in the
    // cache. Never sent to the backend.
    std::string replicate_tag;

    // Throws std::invalid_argument on an empty message list, an empty
    // message, temperature outside [0, 2] or a nonpositive max_tokens.
    void validate() const;
};

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

struct CompletionResponse {
    std::string text;
    std::optional<TokenUsage> usage;
    std::string backend_id;
    // Backend payload as received, when the backend has one.
    std::string raw;
    bool from_cache = false;
};

// Transport-level failure (connection, timeout, HTTP 429/5xx). Retryable.
class TransportError : public BackendError {
public:
    TransportError(const std::string& what, int status = 0) : BackendError(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

// The backend answered but the payload is not what the protocol promises.
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

// Canonical JSON of the request fields that define a call; the cache key is
// its SHA-256 together with the backend id.
std::string canonical_request_json(const std::string& backend_id, const CompletionRequest& request);
std::string cache_key(const std::string& backend_id, const CompletionRequest& request);

// SHA-256 over the message list only (role + content), used to address
// scripted mock responses independently of model and temperature.
std::string prompt_fingerprint(const std::vector<ChatMessage>& messages);

} // namespace rubricforge::llm
