#pragma once

#include "rubricforge/llm/backend.hpp"
#include "rubricforge/llm/cache.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <unordered_set>
#include <vector>

namespace rubricforge::llm {

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_seconds = 1.0;
    double factor = 2.0;
    double jitter = 0.2;  // delays are scaled by a factor in [1 - jitter, 1 + jitter]
    double max_delay_seconds = 60.0;
    // Replaced in tests to avoid real sleeping.
    std::function<void(double)> sleep;

    // Delay before retry number `retry` (1-based), jittered deterministically
    // from the request key.
    double delay(int retry, const std::string& key) const;
};

// Cache-first completion with retries on TransportError. The response is
// stored under cache_key(backend.id(), request) after a successful call.
CompletionResponse complete(CompletionBackend& backend, const CompletionRequest& request, ResponseCache* cache,
                            const RetryPolicy& policy);

// Bundles a backend, cache and retry policy and counts traffic. Thread-safe.
class LlmClient {
public:
    LlmClient(CompletionBackend& backend, ResponseCache* cache, RetryPolicy policy = {});

    CompletionResponse complete(const CompletionRequest& request);

    std::size_t backend_invocations() const { return backend_invocations_.load(); }
    std::size_t cache_hits() const { return cache_hits_.load(); }
    // Cache keys in order of first use.
    std::vector<std::string> keys_used() const;
    std::string backend_id() const { return backend_.id(); }
    ResponseCache* cache() const { return cache_; }

private:
    CompletionBackend& backend_;
    ResponseCache* cache_;
    RetryPolicy policy_;
    std::atomic<std::size_t> backend_invocations_{0};
    std::atomic<std::size_t> cache_hits_{0};
    mutable std::mutex keys_mutex_;
    std::vector<std::string> keys_;
    std::unordered_set<std::string> key_set_;
};

} // namespace rubricforge::llm
