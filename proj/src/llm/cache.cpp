#include "rubricforge/llm/cache.hpp"

#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/io.hpp"

#include <json.hpp>

namespace rubricforge::llm {

using nlohmann::json;
using nlohmann::ordered_json;

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    if (key.size() < 3) throw std::invalid_argument("cache key too short");
    return dir_ / key.substr(0, 2) / (key + ".json");
}

bool ResponseCache::contains(const std::string& key) const { return get(key).has_value(); }

std::optional<CompletionResponse> ResponseCache::get(const std::string& key) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = memory_.find(key); it != memory_.end()) return it->second;
    }
    if (!persistent()) return std::nullopt;
    const auto path = path_for(key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    CompletionResponse r;
    try {
        const json j = json::parse(read_text_file(path));
        const auto& rj = j.at("response");
        r.text = rj.at("text").get<std::string>();
        r.backend_id = rj.at("backend_id").get<std::string>();
        if (rj.contains("usage") && !rj["usage"].is_null()) {
            TokenUsage u;
            u.prompt_tokens = rj["usage"].value("prompt_tokens", 0LL);
            u.completion_tokens = rj["usage"].value("completion_tokens", 0LL);
            r.usage = u;
        }
        if (j.contains("raw")) r.raw = j["raw"].get<std::string>();
    } catch (const json::exception& e) {
        throw DataError("corrupt cache entry " + path.string() + ": " + e.what());
    }
    std::lock_guard lock(mutex_);
    memory_.emplace(key, r);
    return r;
}

void ResponseCache::put(const std::string& key, const std::string& canonical_request,
                        const CompletionResponse& response) {
    CompletionResponse stored = response;
    stored.from_cache = false;
    if (persistent()) {
        ordered_json j;
        j["key"] = key;
        j["request"] = json::parse(canonical_request);
        ordered_json rj;
        rj["text"] = response.text;
        rj["backend_id"] = response.backend_id;
        if (response.usage)
            rj["usage"] = {{"prompt_tokens", response.usage->prompt_tokens},
                           {"completion_tokens", response.usage->completion_tokens}};
        else
            rj["usage"] = nullptr;
        j["response"] = rj;
        if (!response.raw.empty()) j["raw"] = response.raw;
        write_text_file_atomic(path_for(key), j.dump(2) + "\n");
    }
    std::lock_guard lock(mutex_);
    memory_[key] = stored;
}

} // namespace rubricforge::llm
