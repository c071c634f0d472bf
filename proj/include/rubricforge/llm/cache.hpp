#pragma once

#include "rubricforge/llm/types.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace rubricforge::llm {

// Content-addressed response store. On disk each entry lives at
// <dir>/<first two hex digits>/<digest>.json and holds the canonical
// request plus the response; writes are atomic so several processes may
// share a directory. A default-constructed cache is in-memory only.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<CompletionResponse> get(const std::string& key) const;
    void put(const std::string& key, const std::string& canonical_request, const CompletionResponse& response);
    bool contains(const std::string& key) const;

    std::filesystem::path path_for(const std::string& key) const;
    bool persistent() const { return !dir_.empty(); }
    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, CompletionResponse> memory_;
};

} // namespace rubricforge::llm
