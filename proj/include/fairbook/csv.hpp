#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairbook::csv {

// Splits one comma-separated line, honouring RFC 4180 double quoting.
std::vector<std::string> split_line(std::string_view line);

// Quotes a field only when it contains a separator, quote or line break.
std::string escape(std::string_view field);

// Six significant digits, the precision used for every float written to disk.
std::string fmt(double value);
// Round-trip precision, for optimizer traces.
std::string fmt_exact(double value);

// Reads a comma-separated file, checks the header and returns the data rows.
// Throws IngestError when the file is missing or the header differs.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 std::string_view expected_header);

// Writes `content` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace fairbook::csv
