#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace rubricforge {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

std::string sha256_file(const std::filesystem::path& path);

// First 8 bytes of the SHA-256 digest as an integer; used to seed mocks.
std::uint64_t sha256_u64(std::string_view bytes);

} // namespace rubricforge
