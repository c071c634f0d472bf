#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rubricforge {

std::string read_text_file(const std::filesystem::path& path);

// Write to a sibling temp file then rename, so concurrent readers never see
// a partial file. Creates parent directories.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
// Whitespace tokenization after trimming.
std::vector<std::string> split_whitespace(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

} // namespace rubricforge
