#include "rubricforge/util/csv.hpp"

#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rubricforge {

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::vector<CsvRow> records;
    std::vector<std::size_t> starts;
    CsvRow row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t row_start = 1;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        const bool blank = row.size() == 1 && row[0].empty();
        if (!blank) {
            records.push_back(std::move(row));
            starts.push_back(row_start);
        }
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field_started && field.empty()) {
                in_quotes = true;
                field_started = true;
            } else {
                field.push_back(c);
            }
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            ++line;
            row_start = line;
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field starting on line " + std::to_string(row_start));
    if (!field.empty() || !row.empty()) end_row();

    if (records.empty()) return table;
    table.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        table.rows.push_back(std::move(records[i]));
        table.line_numbers.push_back(starts[i]);
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_text_file(path));
}

std::string csv_escape(std::string_view field) {
    const bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                       (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_csv(const CsvTable& table) {
    std::string out;
    auto emit = [&](const CsvRow& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back(',');
            out += csv_escape(row[i]);
        }
        out.push_back('\n');
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
    return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    write_text_file_atomic(path, format_csv(table));
}

std::string format_aligned(const CsvTable& table) {
    std::size_t ncol = table.header.size();
    for (const auto& r : table.rows) ncol = std::max(ncol, r.size());
    std::vector<std::size_t> width(ncol, 0);
    auto measure = [&](const CsvRow& r) {
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    };
    measure(table.header);
    for (const auto& r : table.rows) measure(r);

    std::ostringstream os;
    auto emit = [&](const CsvRow& r) {
        for (std::size_t i = 0; i < ncol; ++i) {
            const std::string cell = i < r.size() ? r[i] : std::string();
            const std::string pad(width[i] - cell.size(), ' ');
            if (i) os << "  ";
            if (i == 0) os << cell << pad;
            else os << pad << cell;
        }
        os << '\n';
    };
    emit(table.header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    total += ncol > 0 ? 2 * (ncol - 1) : 0;
    os << std::string(total, '-') << '\n';
    for (const auto& r : table.rows) emit(r);
    return os.str();
}

void write_table_pair(const std::filesystem::path& stem, const CsvTable& table) {
    auto csv = stem;
    csv += ".csv";
    auto txt = stem;
    txt += ".txt";
    write_csv(csv, table);
    write_text_file_atomic(txt, format_aligned(table));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int digits) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    std::string s(buf);
    if (s == "-0" || s.rfind("-0.", 0) == 0) {
        bool all_zero = std::all_of(s.begin() + 1, s.end(), [](char c) { return c == '0' || c == '.'; });
        if (all_zero) s.erase(0, 1);
    }
    return s;
}

} // namespace rubricforge
