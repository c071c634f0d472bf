#pragma once

// Minimal RFC 4180 CSV reading/writing plus aligned plain-text tables.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rubricforge {

using CsvRow = std::vector<std::string>;

struct CsvTable {
    CsvRow header;
    std::vector<CsvRow> rows;
    // 1-based physical line on which each row starts (for error messages).
    std::vector<std::size_t> line_numbers;

    // Index of a header column, or -1.
    int column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_escape(std::string_view field);
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Fixed-width rendering: left-aligned first column, right-aligned others.
std::string format_aligned(const CsvTable& table);

// Writes both <stem>.csv and <stem>.txt.
void write_table_pair(const std::filesystem::path& stem, const CsvTable& table);

// Shortest round-trip decimal form, e.g. 0.75, 1e-07.
std::string format_double(double v);
// Fixed precision, e.g. format_fixed(0.7512, 2) == "0.75".
std::string format_fixed(double v, int digits);

} // namespace rubricforge
