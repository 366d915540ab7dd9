#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace fairbook {

// 64-bit FNV-1a. Used for integrity checks between pipeline steps, not security.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string checksum_hex(std::string_view bytes);

// Empty string when the file does not exist.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace fairbook
