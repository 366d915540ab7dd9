#include "fairbook/checksum.hpp"

#include <cstdio>

#include "fairbook/csv.hpp"

namespace fairbook {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string checksum_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

std::string file_checksum(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return checksum_hex(csv::read_file(path));
}

}  // namespace fairbook
