#include "rubricforge/llm/parsers.hpp"

#include "rubricforge/llm/prompts.hpp"
#include "rubricforge/util/io.hpp"

#include <cctype>
#include <charconv>

namespace rubricforge::llm {

namespace {

std::string clip(std::string_view raw) {
    constexpr std::size_t kMax = 2000;
    return raw.size() <= kMax ? std::string(raw) : std::string(raw.substr(0, kMax)) + "...";
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool is_separator_row(std::string_view line) {
    bool dash = false;
    for (char c : line) {
        if (c == '-') dash = true;
        else if (c != '|' && c != ':' && c != ' ' && c != '\t') return false;
    }
    return dash;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

} // namespace

std::string strip_code_fences(std::string_view text) {
    std::string out;
    for (const auto& line : lines_of(text)) {
        if (trim(line).rfind("```", 0) == 0) continue;
        out += line;
        out += '\n';
    }
    return out;
}

CriteriaParse parse_criteria_rows(std::string_view text) {
    CriteriaParse out;
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = trim(lines[i]);
        if (line.empty() || line.rfind("```", 0) == 0) continue;
        if (line.find('|') == std::string::npos) continue;
        if (is_separator_row(line)) continue;
        if (line.front() == '|') line.erase(0, 1);
        if (!line.empty() && line.back() == '|') line.pop_back();
        auto fields = split(line, '|');
        for (auto& f : fields) f = trim(f);
        if (fields.size() >= 2 && to_lower(fields[0]) == "no" && starts_with_ci(fields[1], "dimension")) continue;
        if (fields.size() != 6) {
            out.skipped.push_back({i + 1, "expected 6 fields, got " + std::to_string(fields.size()), clip(lines[i])});
            continue;
        }
        std::string ord = fields[0];
        if (!ord.empty() && (ord.back() == '.' || ord.back() == ')')) ord.pop_back();
        CriterionRow row;
        if (!parse_int(ord, row.ordinal)) {
            out.skipped.push_back({i + 1, "ordinal is not an integer", clip(lines[i])});
            continue;
        }
        bool blank = false;
        for (std::size_t k = 1; k < 6; ++k) blank = blank || fields[k].empty();
        if (blank) {
            out.skipped.push_back({i + 1, "empty field", clip(lines[i])});
            continue;
        }
        row.name = fields[1];
        row.definition = fields[2];
        row.anchor1 = fields[3];
        row.anchor3 = fields[4];
        row.anchor5 = fields[5];
        out.rows.push_back(std::move(row));
    }
    if (out.rows.empty()) {
        std::string why = "no parseable criteria rows";
        if (!out.skipped.empty()) why += " (" + std::to_string(out.skipped.size()) + " malformed)";
        throw ParseError(why, clip(text));
    }
    return out;
}

namespace {

void skip_ws(std::string_view s, std::size_t& i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

bool read_quoted(std::string_view s, std::size_t& i, std::string& out) {
    if (i >= s.size() || (s[i] != '"' && s[i] != '\'')) return false;
    const char q = s[i++];
    std::string raw;
    while (i < s.size()) {
        const char c = s[i];
        if (c == '\\') {
            if (i + 1 >= s.size()) return false;
            raw += c;
            raw += s[i + 1];
            i += 2;
            continue;
        }
        if (c == q) {
            ++i;
            out = unescape_quoted(raw);
            return true;
        }
        raw += c;
        ++i;
    }
    return false;
}

bool read_tuple(std::string_view s, std::size_t& i, ConsolidatedTuple& t) {
    if (i >= s.size() || s[i] != '(') return false;
    ++i;
    skip_ws(s, i);
    const std::size_t start = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    std::string_view digits = s.substr(start, i - start);
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    if (!parse_int(digits, t.ordinal)) return false;
    skip_ws(s, i);
    if (i >= s.size() || s[i] != ',') return false;
    ++i;
    skip_ws(s, i);
    if (!read_quoted(s, i, t.name)) return false;
    skip_ws(s, i);
    if (i >= s.size() || s[i] != ',') return false;
    ++i;
    skip_ws(s, i);
    if (!read_quoted(s, i, t.definition)) return false;
    skip_ws(s, i);
    if (i < s.size() && s[i] == ',') {
        ++i;
        skip_ws(s, i);
    }
    if (i >= s.size() || s[i] != ')') return false;
    ++i;
    return true;
}

} // namespace

ConsolidatedTuple parse_consolidated_tuple(std::string_view text) {
    const std::string body = strip_code_fences(text);
    std::vector<ConsolidatedTuple> found;
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] != '(') {
            ++i;
            continue;
        }
        std::size_t j = i;
        ConsolidatedTuple t;
        if (read_tuple(body, j, t)) {
            found.push_back(std::move(t));
            i = j;
        } else {
            ++i;
        }
    }
    if (found.empty()) throw ParseError("no (No, \"Name\", \"Definition\") tuple found", clip(text));
    if (found.size() > 1)
        throw ParseError("expected exactly one tuple, found " + std::to_string(found.size()), clip(text));
    if (trim(found[0].name).empty() || trim(found[0].definition).empty())
        throw ParseError("consolidated tuple has an empty name or definition", clip(text));
    return found[0];
}

std::vector<int> parse_score_list(std::string_view text, std::size_t expected_len) {
    if (expected_len < 1) throw std::invalid_argument("parse_score_list: expected_len must be >= 1");
    std::string s = trim(strip_code_fences(text));
    if (!s.empty() && s.back() == '.') s = trim(s.substr(0, s.size() - 1));
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
    if (!s.empty() && s.back() == '.') s = trim(s.substr(0, s.size() - 1));
    std::vector<std::string> tokens;
    if (s.find(',') != std::string::npos) {
        for (auto& t : split(s, ',')) tokens.push_back(trim(t));
        if (!tokens.empty() && tokens.back().empty()) tokens.pop_back();  // trailing comma
    } else {
        tokens = split_whitespace(s);
    }
    if (tokens.size() != expected_len)
        throw ParseError("expected " + std::to_string(expected_len) + " scores, found " + std::to_string(tokens.size()),
                         clip(text));
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        int v = 0;
        if (!parse_int(t, v)) throw ParseError("score \"" + clip(t) + "\" is not an integer", clip(text));
        if (v < 1 || v > 5) throw ParseError("score " + std::to_string(v) + " outside 1..5", clip(text));
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> extract_quoted_strings(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] != '"') {
            ++i;
            continue;
        }
        std::string v;
        std::size_t j = i;
        if (read_quoted(line, j, v)) {
            out.push_back(std::move(v));
            i = j;
        } else {
            break;
        }
    }
    return out;
}

} // namespace rubricforge::llm
