#include "rubricforge/rubric/rubric.hpp"

#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/io.hpp"

#include <json.hpp>

#include <set>
#include <stdexcept>

namespace rubricforge {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t anchor_slot(int level) {
    switch (level) {
    case 1: return 0;
    case 3: return 1;
    case 5: return 2;
    default: throw std::invalid_argument("anchor level must be 1, 3 or 5, got " + std::to_string(level));
    }
}

std::string CandidateCriterion::ref() const {
    return "a" + std::to_string(agent_id) + "." + std::to_string(ordinal);
}

std::vector<std::string> Rubric::names() const {
    std::vector<std::string> out;
    for (const auto& d : dimensions) out.push_back(d.name);
    return out;
}

int Rubric::find(const std::string& name) const {
    for (std::size_t i = 0; i < dimensions.size(); ++i)
        if (dimensions[i].name == name) return static_cast<int>(i);
    return -1;
}

void Rubric::validate() const {
    if (dimensions.empty()) throw DataError("rubric has no dimensions");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < dimensions.size(); ++i) {
        const auto& d = dimensions[i];
        const std::string where = "rubric dimension " + std::to_string(i + 1);
        if (trim(d.name).empty()) throw DataError(where + ": empty name");
        if (trim(d.definition).empty()) throw DataError(where + " (" + d.name + "): empty definition");
        for (std::size_t a = 0; a < 3; ++a) {
            if (trim(d.anchors[a].description).empty())
                throw DataError(where + " (" + d.name + "): missing anchor for score " +
                                std::to_string(kAnchorLevels[a]));
            if (d.anchors[a].calibration_examples.size() > 2)
                throw DataError(where + " (" + d.name + "): more than two calibration examples");
        }
        if (!seen.insert(d.name).second) throw DataError(where + ": duplicate name \"" + d.name + "\"");
    }
}

Rubric rubric_from_candidates(const std::vector<CandidateCriterion>& criteria) {
    Rubric r;
    for (const auto& c : criteria) {
        RubricDimension d;
        d.name = c.name;
        d.definition = c.definition;
        for (std::size_t a = 0; a < 3; ++a) d.anchors[a].description = c.anchors[a];
        d.source_cluster = {c.ref()};
        r.dimensions.push_back(std::move(d));
    }
    return r;
}

std::string format_rubric_json(const Rubric& rubric) {
    ordered_json j;
    ordered_json dims = ordered_json::array();
    for (const auto& d : rubric.dimensions) {
        ordered_json dj;
        dj["name"] = d.name;
        dj["definition"] = d.definition;
        ordered_json anchors;
        for (std::size_t a = 0; a < 3; ++a) {
            const auto& an = d.anchors[a];
            anchors[std::to_string(kAnchorLevels[a])] = {{"description", an.description},
                                                         {"examples", an.examples},
                                                         {"calibration_examples", an.calibration_examples}};
        }
        dj["anchors"] = anchors;
        dj["source_cluster"] = d.source_cluster;
        dims.push_back(dj);
    }
    j["dimensions"] = dims;
    j["provenance"] = {{"seed", rubric.seed}, {"manifest", rubric.manifest}};
    j["warnings"] = rubric.warnings;
    return j.dump(2) + "\n";
}

Rubric parse_rubric_json(std::string_view text) {
    Rubric r;
    try {
        const json j = json::parse(text);
        for (const auto& dj : j.at("dimensions")) {
            RubricDimension d;
            d.name = dj.at("name").get<std::string>();
            d.definition = dj.at("definition").get<std::string>();
            const auto& anchors = dj.at("anchors");
            for (std::size_t a = 0; a < 3; ++a) {
                const auto& aj = anchors.at(std::to_string(kAnchorLevels[a]));
                if (aj.is_string()) {
                    d.anchors[a].description = aj.get<std::string>();
                    continue;
                }
                d.anchors[a].description = aj.at("description").get<std::string>();
                if (aj.contains("examples")) d.anchors[a].examples = aj["examples"].get<std::vector<std::string>>();
                if (aj.contains("calibration_examples"))
                    d.anchors[a].calibration_examples = aj["calibration_examples"].get<std::vector<std::string>>();
            }
            if (dj.contains("source_cluster")) d.source_cluster = dj["source_cluster"].get<std::vector<std::string>>();
            r.dimensions.push_back(std::move(d));
        }
        if (j.contains("provenance")) {
            const auto& p = j["provenance"];
            if (p.contains("seed")) r.seed = p["seed"].get<std::uint64_t>();
            if (p.contains("manifest")) r.manifest = p["manifest"].get<std::string>();
        }
        if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid rubric JSON: ") + e.what());
    }
    r.validate();
    return r;
}

void write_rubric(const std::filesystem::path& path, const Rubric& rubric) {
    write_text_file_atomic(path, format_rubric_json(rubric));
}

Rubric read_rubric(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("rubric file not found: " + path.string());
    try {
        return parse_rubric_json(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace rubricforge
