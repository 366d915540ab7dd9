#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fairbook {

inline constexpr const char* kToolVersion = "0.1.0";

// `key = value` lines, sorted by key. Each pipeline command loads the manifest
// of the output directory, adds its own keys and writes it back atomically.
class Manifest {
 public:
  static Manifest load(const std::filesystem::path& path);  // empty when missing
  void save(const std::filesystem::path& path) const;

  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  void erase_prefix(const std::string& prefix);
  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string text() const;

 private:
  std::map<std::string, std::string> entries_;
};

// Switches for every methodological choice that the pipeline makes on the
// user's behalf; written as decision.* keys.
std::vector<std::pair<std::string, std::string>> decision_switches();

}  // namespace fairbook
