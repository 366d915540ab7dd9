#pragma once

#include <iostream>

#include "fairbook/config.hpp"

namespace fairbook {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitInput = 2;

struct CommandOptions {
  unsigned jobs = 1;
  bool strict = false;  // combined with the config's own flag
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

// Each command reads and extends <output>/manifest.txt and returns an exit code:
// 0 success, 1 some models failed, 2 input or contract error.

// Raw ratings -> dataset.csv, id maps, provenance.txt.
int cmd_prepare(const RunConfig& config, const CommandOptions& options = {});
// Item popularity, user profile statistics, groups and their summaries.
int cmd_stats(const RunConfig& config, const CommandOptions& options = {});
// Train/test split, one fit per configured model, recs_<name>.csv and
// test_scores_<name>.csv.
int cmd_run(const RunConfig& config, const CommandOptions& options = {});
// Accuracy, GAP, frequency, significance and tradeoff files plus summary.txt.
int cmd_evaluate(const RunConfig& config, const CommandOptions& options = {});
// Prints the text summaries written by stats and evaluate.
int cmd_report(const RunConfig& config, const CommandOptions& options = {});

}  // namespace fairbook
