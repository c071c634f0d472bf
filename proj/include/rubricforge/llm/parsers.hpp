#pragma once

#include "rubricforge/util/errors.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rubricforge::llm {

// All parsers either return a value or throw ParseError (carrying the raw
// text); they never fail in any other way on arbitrary input.

struct CriterionRow {
    int ordinal = 0;
    std::string name;
    std::string definition;
    std::string anchor1;
    std::string anchor3;
    std::string anchor5;
};

struct SkippedRow {
    std::size_t line = 0;  // 1-based line in the reply
    std::string reason;
    std::string raw;
};

struct CriteriaParse {
    std::vector<CriterionRow> rows;
    std::vector<SkippedRow> skipped;
};

// Pipe-delimited rows "No|Name|Definition|Score 1|Score 3|Score 5". Code
// fences, header lines, markdown separator rows and lines without a pipe are
// ignored; rows with the wrong field count or a non-integer ordinal are
// skipped and reported. Throws when no row survives.
CriteriaParse parse_criteria_rows(std::string_view text);

struct ConsolidatedTuple {
    int ordinal = 0;
    std::string name;
    std::string definition;
};

// Exactly one (<int>, "<name>", "<definition>") tuple; strings may use single
// or double quotes with backslash escapes.
ConsolidatedTuple parse_consolidated_tuple(std::string_view text);

// expected_len integers in 1..5, comma- or whitespace-separated, optionally
// bracketed and followed by a period.
std::vector<int> parse_score_list(std::string_view text, std::size_t expected_len);

// Contents of every double-quoted string in a line, unescaped.
std::vector<std::string> extract_quoted_strings(std::string_view line);

// Removes lines that open or close a ``` code fence.
std::string strip_code_fences(std::string_view text);

} // namespace rubricforge::llm
