#include "rubricforge/llm/client.hpp"

#include "rubricforge/util/hash.hpp"
#include "rubricforge/util/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace rubricforge::llm {

double RetryPolicy::delay(int retry, const std::string& key) const {
    const double nominal = std::min(max_delay_seconds, base_delay_seconds * std::pow(factor, retry - 1));
    Rng rng(sha256_u64(key), "retry-jitter", static_cast<std::uint64_t>(retry));
    const double scale = 1.0 + jitter * (2.0 * rng.uniform01() - 1.0);
    return std::max(0.0, nominal * scale);
}

CompletionResponse complete(CompletionBackend& backend, const CompletionRequest& request, ResponseCache* cache,
                            const RetryPolicy& policy) {
    request.validate();
    const std::string backend_id = backend.id();
    const std::string key = cache_key(backend_id, request);
    if (cache) {
        if (auto hit = cache->get(key)) {
            hit->from_cache = true;
            return *hit;
        }
    }
    const int attempts = std::max(1, policy.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            CompletionResponse r = backend.complete(request);
            r.backend_id = backend_id;
            r.from_cache = false;
            if (cache) cache->put(key, canonical_request_json(backend_id, request), r);
            return r;
        } catch (const TransportError& e) {
            if (attempt >= attempts)
                throw TransportError("backend " + backend_id + ": giving up after " + std::to_string(attempts) +
                                         " attempts: " + e.what(),
                                     e.status());
            const double d = policy.delay(attempt, key);
            if (policy.sleep) policy.sleep(d);
            else std::this_thread::sleep_for(std::chrono::duration<double>(d));
        }
    }
}

LlmClient::LlmClient(CompletionBackend& backend, ResponseCache* cache, RetryPolicy policy)
    : backend_(backend), cache_(cache), policy_(std::move(policy)) {}

namespace {

// Counts real backend calls made through complete().
class CountingBackend : public CompletionBackend {
public:
    CountingBackend(CompletionBackend& inner, std::atomic<std::size_t>& counter) : inner_(inner), counter_(counter) {}
    std::string id() const override { return inner_.id(); }
    CompletionResponse complete(const CompletionRequest& request) override {
        ++counter_;
        return inner_.complete(request);
    }

private:
    CompletionBackend& inner_;
    std::atomic<std::size_t>& counter_;
};

} // namespace

CompletionResponse LlmClient::complete(const CompletionRequest& request) {
    CountingBackend counting(backend_, backend_invocations_);
    CompletionResponse r = llm::complete(counting, request, cache_, policy_);
    if (r.from_cache) ++cache_hits_;
    const std::string key = cache_key(backend_.id(), request);
    std::lock_guard lock(keys_mutex_);
    if (key_set_.insert(key).second) keys_.push_back(key);
    return r;
}

std::vector<std::string> LlmClient::keys_used() const {
    std::lock_guard lock(keys_mutex_);
    return keys_;
}

} // namespace rubricforge::llm
