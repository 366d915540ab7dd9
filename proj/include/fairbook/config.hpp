#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairbook/evaluation.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {

struct ModelEntry {
  std::string name;  // used in output file names
  ModelConfig config;
  bool explicit_seed = false;
};

struct ExternalEntry {
  std::string name;
  std::filesystem::path path;
};

// A run configuration in sectioned `key = value` form:
//
//   [data]        ratings, output, strict
//   [split]       ratio, seed, mode (global | per_user)
//   [evaluation]  n
//   [model "<name>"]     algorithm (defaults to <name>), k, learning_rate,
//                        regularization, epochs, neighbors, alpha,
//                        prior_shape, prior_rate, seed
//   [external "<name>"]  path of a recommendations file made elsewhere
//
// '#' and ';' start comments. Relative paths resolve against the config file's
// directory. Without any model section all nine algorithms run at defaults.
struct RunConfig {
  std::filesystem::path ratings;
  std::filesystem::path output = "out";
  double split_ratio = 0.8;
  std::uint64_t seed = 42;
  SplitMode split_mode = SplitMode::Global;
  std::size_t n = 10;
  bool strict = false;
  std::vector<ModelEntry> models;
  std::vector<ExternalEntry> externals;
  std::string source;  // config text, hashed into the manifest
  std::optional<std::uint64_t> seed_override;

  static RunConfig parse(std::string_view text, const std::filesystem::path& base_dir = ".");
  static RunConfig load(const std::filesystem::path& path);

  // Replaces the run seed and every model seed not set explicitly.
  void override_seed(std::uint64_t seed);
  std::string hash() const;
};

}  // namespace fairbook
