#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rubricforge {

inline constexpr std::array<int, 3> kAnchorLevels{1, 3, 5};

// Position of an anchor level in the anchor arrays; throws unless 1, 3 or 5.
std::size_t anchor_slot(int level);

struct CandidateCriterion {
    int agent_id = 0;
    int ordinal = 0;
    std::string name;
    std::string definition;
    std::array<std::string, 3> anchors;  // levels 1, 3, 5

    // Stable reference "a<agent>.<ordinal>".
    std::string ref() const;
    bool operator==(const CandidateCriterion&) const = default;
};

struct Anchor {
    std::string description;
    std::vector<std::string> examples;
    // Examples merged from human-AI calibration; at most two.
    std::vector<std::string> calibration_examples;

    bool operator==(const Anchor&) const = default;
};

struct RubricDimension {
    std::string name;
    std::string definition;
    std::array<Anchor, 3> anchors;  // levels 1, 3, 5
    std::vector<std::string> source_cluster;  // CandidateCriterion refs

    bool operator==(const RubricDimension&) const = default;
};

struct Rubric {
    std::vector<RubricDimension> dimensions;
    std::uint64_t seed = 0;
    std::string manifest;  // reference to the run manifest that produced it
    std::vector<std::string> warnings;

    std::size_t size() const { return dimensions.size(); }
    std::vector<std::string> names() const;
    // Index of a dimension by exact name, or -1.
    int find(const std::string& name) const;
    // Throws DataError if empty, a name or definition is blank, an anchor
    // description is missing, or two names coincide.
    void validate() const;

    bool operator==(const Rubric&) const = default;
};

// A rubric whose dimensions are the given candidates (used to score them).
Rubric rubric_from_candidates(const std::vector<CandidateCriterion>& criteria);

std::string format_rubric_json(const Rubric& rubric);
Rubric parse_rubric_json(std::string_view text);
void write_rubric(const std::filesystem::path& path, const Rubric& rubric);
Rubric read_rubric(const std::filesystem::path& path);

} // namespace rubricforge
