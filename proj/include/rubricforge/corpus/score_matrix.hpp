#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rubricforge {

// Instances x dimensions grid of 1..5 ratings with a missing-cell mask.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    ScoreMatrix(std::vector<std::string> instance_ids, std::vector<std::string> case_ids,
                std::vector<std::string> dimension_ids);

    std::size_t rows() const { return instance_ids_.size(); }
    std::size_t cols() const { return dimension_ids_.size(); }

    const std::vector<std::string>& instance_ids() const { return instance_ids_; }
    const std::vector<std::string>& case_ids() const { return case_ids_; }
    const std::vector<std::string>& dimension_ids() const { return dimension_ids_; }
    void rename_dimensions(std::vector<std::string> ids);

    bool missing(std::size_t r, std::size_t c) const { return mask_[r * cols() + c] != 0; }
    // Value of an unmasked cell; throws if masked.
    int at(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, int value);
    void set_missing(std::size_t r, std::size_t c);

    std::size_t missing_count() const;
    bool row_complete(std::size_t r) const;
    std::optional<std::size_t> row_of(const std::string& instance_id) const;
    std::optional<std::size_t> column_of(const std::string& dimension_id) const;

    // Column values for rows unmasked in that column, with their row indices.
    std::vector<int> column(std::size_t c, std::vector<std::size_t>* rows_out = nullptr) const;

    bool operator==(const ScoreMatrix&) const = default;

private:
    std::vector<std::string> instance_ids_;
    std::vector<std::string> case_ids_;
    std::vector<std::string> dimension_ids_;
    std::vector<int> values_;
    std::vector<std::uint8_t> mask_;
};

// CSV: instance_id, case_id, one column per dimension; masked cells empty.
// The mask is also written to "<path stem>.mask.csv" with 1 marking missing.
std::string format_score_matrix(const ScoreMatrix& m);
std::string format_score_mask(const ScoreMatrix& m);
std::filesystem::path mask_path_for(const std::filesystem::path& path);
void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& m);
// Reads the CSV and, when present, its mask sidecar (which must agree).
ScoreMatrix read_score_matrix(const std::filesystem::path& path);
ScoreMatrix parse_score_matrix(std::string_view csv_text);

struct CalibrationItem {
    std::string instance_id;
    std::size_t dimension = 0;  // column index
    std::string stratum;        // "high", "mid" or "low"
};

// For each of the first rubric_size dimensions: 2 high (4-5), 1 mid (3) and
// 2 low (1-2) instances by that dimension's score, never reusing an id
// picked for an earlier dimension.
std::vector<CalibrationItem> stratified_calibration_sample(const ScoreMatrix& scores, std::size_t rubric_size,
                                                           std::uint64_t seed);

} // namespace rubricforge
