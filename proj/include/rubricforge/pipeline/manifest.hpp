#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rubricforge::pipeline {

const char* tool_version();

struct ArtifactRef {
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string command;
    std::string tool_version;
    std::map<std::string, std::string> config;
    std::string corpus_digest;
    std::map<std::string, ArtifactRef> inputs;   // role -> file
    std::map<std::string, ArtifactRef> outputs;  // role -> file
    std::map<std::string, std::vector<std::string>> cache_keys;  // stage -> keys in first-use order
    std::map<std::string, std::vector<std::string>> subsets;     // agent -> instance ids
    std::string rubric_digest;
    std::map<std::string, std::string> counters;  // e.g. backend calls, cache hits
    std::vector<std::string> warnings;
    std::string started_at;   // UTC, ISO 8601
    std::string finished_at;

    void add_input(const std::string& role, const std::filesystem::path& path);
    void add_output(const std::string& role, const std::filesystem::path& path);
};

std::string utc_timestamp();

std::string format_manifest_json(const RunManifest& m);
RunManifest parse_manifest_json(std::string_view text);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

// "<dir>/<stem>.manifest.json" next to a primary output.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

} // namespace rubricforge::pipeline
