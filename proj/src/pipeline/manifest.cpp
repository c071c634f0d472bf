#include "rubricforge/pipeline/manifest.hpp"

#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/hash.hpp"
#include "rubricforge/util/io.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>

#ifndef RUBRICFORGE_VERSION
#define RUBRICFORGE_VERSION "0.0.0"
#endif

namespace rubricforge::pipeline {

using nlohmann::ordered_json;

const char* tool_version() { return RUBRICFORGE_VERSION; }

void RunManifest::add_input(const std::string& role, const std::filesystem::path& path) {
    inputs[role] = {std::filesystem::absolute(path).lexically_normal().string(), sha256_file(path)};
}

void RunManifest::add_output(const std::string& role, const std::filesystem::path& path) {
    outputs[role] = {std::filesystem::absolute(path).lexically_normal().string(), sha256_file(path)};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

ordered_json refs_json(const std::map<std::string, ArtifactRef>& refs) {
    ordered_json j = ordered_json::object();
    for (const auto& [role, ref] : refs) j[role] = {{"path", ref.path}, {"sha256", ref.sha256}};
    return j;
}

std::map<std::string, ArtifactRef> refs_from(const nlohmann::json& j) {
    std::map<std::string, ArtifactRef> out;
    for (const auto& [role, v] : j.items()) out[role] = {v.at("path").get<std::string>(), v.value("sha256", "")};
    return out;
}

} // namespace

std::string format_manifest_json(const RunManifest& m) {
    ordered_json j;
    j["command"] = m.command;
    j["tool_version"] = m.tool_version;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["config"] = m.config;
    j["corpus_digest"] = m.corpus_digest;
    j["rubric_digest"] = m.rubric_digest;
    j["inputs"] = refs_json(m.inputs);
    j["outputs"] = refs_json(m.outputs);
    j["subsets"] = m.subsets;
    j["cache_keys"] = m.cache_keys;
    j["counters"] = m.counters;
    j["warnings"] = m.warnings;
    return j.dump(2) + "\n";
}

RunManifest parse_manifest_json(std::string_view text) {
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.command = j.value("command", "");
        m.tool_version = j.value("tool_version", "");
        m.started_at = j.value("started_at", "");
        m.finished_at = j.value("finished_at", "");
        if (j.contains("config")) m.config = j["config"].get<std::map<std::string, std::string>>();
        m.corpus_digest = j.value("corpus_digest", "");
        m.rubric_digest = j.value("rubric_digest", "");
        if (j.contains("inputs")) m.inputs = refs_from(j["inputs"]);
        if (j.contains("outputs")) m.outputs = refs_from(j["outputs"]);
        if (j.contains("subsets")) m.subsets = j["subsets"].get<std::map<std::string, std::vector<std::string>>>();
        if (j.contains("cache_keys"))
            m.cache_keys = j["cache_keys"].get<std::map<std::string, std::vector<std::string>>>();
        if (j.contains("counters")) m.counters = j["counters"].get<std::map<std::string, std::string>>();
        if (j.contains("warnings")) m.warnings = j["warnings"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed run manifest: ") + e.what());
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    write_text_file_atomic(path, format_manifest_json(m));
}

RunManifest read_manifest(const std::filesystem::path& path) {
    try {
        return parse_manifest_json(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
    return output.parent_path() / (output.stem().string() + ".manifest.json");
}

} // namespace rubricforge::pipeline
