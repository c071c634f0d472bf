#include "rubricforge/corpus/score_matrix.hpp"

#include "rubricforge/util/csv.hpp"
#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/io.hpp"
#include "rubricforge/util/rng.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rubricforge {

ScoreMatrix::ScoreMatrix(std::vector<std::string> instance_ids, std::vector<std::string> case_ids,
                         std::vector<std::string> dimension_ids)
    : instance_ids_(std::move(instance_ids)), case_ids_(std::move(case_ids)), dimension_ids_(std::move(dimension_ids)) {
    if (case_ids_.size() != instance_ids_.size()) throw std::invalid_argument("ScoreMatrix: id list lengths differ");
    values_.assign(rows() * cols(), 0);
    mask_.assign(rows() * cols(), 1);
}

void ScoreMatrix::rename_dimensions(std::vector<std::string> ids) {
    if (ids.size() != dimension_ids_.size()) throw std::invalid_argument("rename_dimensions: count mismatch");
    dimension_ids_ = std::move(ids);
}

int ScoreMatrix::at(std::size_t r, std::size_t c) const {
    if (r >= rows() || c >= cols()) throw std::out_of_range("ScoreMatrix::at");
    if (missing(r, c)) throw std::logic_error("ScoreMatrix::at: cell is masked");
    return values_[r * cols() + c];
}

void ScoreMatrix::set(std::size_t r, std::size_t c, int value) {
    if (r >= rows() || c >= cols()) throw std::out_of_range("ScoreMatrix::set");
    if (value < 1 || value > 5) throw std::invalid_argument("ScoreMatrix::set: score must be in 1..5");
    values_[r * cols() + c] = value;
    mask_[r * cols() + c] = 0;
}

void ScoreMatrix::set_missing(std::size_t r, std::size_t c) {
    if (r >= rows() || c >= cols()) throw std::out_of_range("ScoreMatrix::set_missing");
    values_[r * cols() + c] = 0;
    mask_[r * cols() + c] = 1;
}

std::size_t ScoreMatrix::missing_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

bool ScoreMatrix::row_complete(std::size_t r) const {
    for (std::size_t c = 0; c < cols(); ++c)
        if (missing(r, c)) return false;
    return true;
}

std::optional<std::size_t> ScoreMatrix::row_of(const std::string& instance_id) const {
    auto it = std::find(instance_ids_.begin(), instance_ids_.end(), instance_id);
    if (it == instance_ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - instance_ids_.begin());
}

std::optional<std::size_t> ScoreMatrix::column_of(const std::string& dimension_id) const {
    auto it = std::find(dimension_ids_.begin(), dimension_ids_.end(), dimension_id);
    if (it == dimension_ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - dimension_ids_.begin());
}

std::vector<int> ScoreMatrix::column(std::size_t c, std::vector<std::size_t>* rows_out) const {
    std::vector<int> out;
    if (rows_out) rows_out->clear();
    for (std::size_t r = 0; r < rows(); ++r) {
        if (missing(r, c)) continue;
        out.push_back(values_[r * cols() + c]);
        if (rows_out) rows_out->push_back(r);
    }
    return out;
}

std::string format_score_matrix(const ScoreMatrix& m) {
    CsvTable t;
    t.header = {"instance_id", "case_id"};
    for (const auto& d : m.dimension_ids()) t.header.push_back(d);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        CsvRow row{m.instance_ids()[r], m.case_ids()[r]};
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.missing(r, c) ? "" : std::to_string(m.at(r, c)));
        t.rows.push_back(std::move(row));
    }
    return format_csv(t);
}

std::string format_score_mask(const ScoreMatrix& m) {
    CsvTable t;
    t.header = {"instance_id"};
    for (const auto& d : m.dimension_ids()) t.header.push_back(d);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        CsvRow row{m.instance_ids()[r]};
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.missing(r, c) ? "1" : "0");
        t.rows.push_back(std::move(row));
    }
    return format_csv(t);
}

std::filesystem::path mask_path_for(const std::filesystem::path& path) {
    auto p = path;
    p.replace_extension(".mask.csv");
    return p;
}

void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& m) {
    write_text_file_atomic(path, format_score_matrix(m));
    write_text_file_atomic(mask_path_for(path), format_score_mask(m));
}

ScoreMatrix parse_score_matrix(std::string_view csv_text) {
    const CsvTable t = parse_csv(csv_text);
    if (t.header.size() < 3 || t.header[0] != "instance_id" || t.header[1] != "case_id")
        throw DataError("score matrix: header must be instance_id,case_id,<dimension>...");
    std::vector<std::string> ids, cases;
    for (const auto& row : t.rows) {
        ids.push_back(row.empty() ? "" : row[0]);
        cases.push_back(row.size() > 1 ? row[1] : "");
    }
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) throw DataError("score matrix: duplicate instance_id");
    ScoreMatrix m(ids, cases, std::vector<std::string>(t.header.begin() + 2, t.header.end()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != t.header.size())
            throw DataError("score matrix line " + std::to_string(t.line_numbers[r]) + ": wrong field count");
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const std::string cell = trim(row[c + 2]);
            if (cell.empty()) continue;
            if (cell.size() != 1 || cell[0] < '1' || cell[0] > '5')
                throw DataError("score matrix line " + std::to_string(t.line_numbers[r]) + ": invalid score \"" +
                                cell + "\" in column " + m.dimension_ids()[c]);
            m.set(r, c, cell[0] - '0');
        }
    }
    return m;
}

ScoreMatrix read_score_matrix(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("score matrix not found: " + path.string());
    ScoreMatrix m = parse_score_matrix(read_text_file(path));
    const auto mp = mask_path_for(path);
    if (std::filesystem::exists(mp)) {
        const CsvTable mask = read_csv(mp);
        if (mask.rows.size() != m.rows() || mask.header.size() != m.cols() + 1)
            throw DataError("mask sidecar shape does not match " + path.string());
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (mask.rows[r].size() != m.cols() + 1 || mask.rows[r][0] != m.instance_ids()[r])
                throw DataError("mask sidecar row " + std::to_string(r + 1) + " does not match " + path.string());
            for (std::size_t c = 0; c < m.cols(); ++c) {
                const bool masked = trim(mask.rows[r][c + 1]) == "1";
                if (masked != m.missing(r, c))
                    throw DataError("mask sidecar disagrees with " + path.string() + " at row " + std::to_string(r + 1));
            }
        }
    }
    return m;
}

std::vector<CalibrationItem> stratified_calibration_sample(const ScoreMatrix& scores, std::size_t rubric_size,
                                                           std::uint64_t seed) {
    if (rubric_size < 1 || rubric_size > scores.cols())
        throw std::invalid_argument("stratified_calibration_sample: rubric_size out of range");
    struct Quota {
        const char* name;
        int lo, hi;
        std::size_t count;
    };
    const Quota quotas[] = {{"high", 4, 5, 2}, {"mid", 3, 3, 1}, {"low", 1, 2, 2}};
    std::set<std::size_t> used;
    std::vector<CalibrationItem> out;
    for (std::size_t d = 0; d < rubric_size; ++d) {
        Rng rng(seed, "calibration", d);
        for (const auto& q : quotas) {
            std::vector<std::size_t> pool;
            for (std::size_t r = 0; r < scores.rows(); ++r) {
                if (scores.missing(r, d) || used.count(r)) continue;
                const int v = scores.at(r, d);
                if (v >= q.lo && v <= q.hi) pool.push_back(r);
            }
            if (pool.size() < q.count)
                throw DataError("calibration sample: " + std::string(q.name) + " stratum exhausted for dimension " +
                                std::to_string(d + 1) + " (" + scores.dimension_ids()[d] + "): need " +
                                std::to_string(q.count) + ", have " + std::to_string(pool.size()));
            for (auto k : rng.sample_without_replacement(pool.size(), q.count)) {
                used.insert(pool[k]);
                out.push_back({scores.instance_ids()[pool[k]], d, q.name});
            }
        }
    }
    return out;
}

} // namespace rubricforge
