#include <charconv>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "fairbook/csv.hpp"
#include "fairbook/error.hpp"
#include "fairbook/pipeline.hpp"
#include "fairbook/synthetic.hpp"

namespace {

int run_command(const std::string& name, const std::string& config_path, const fairbook::CommandOptions& opts) {
  using namespace fairbook;
  RunConfig cfg;
  try {
    cfg = RunConfig::load(config_path);
    if (const char* env = std::getenv("FAIRBOOK_SEED"); env && *env) {
      std::uint64_t seed = 0;
      const std::string_view s(env);
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ContractError("FAIRBOOK_SEED must be a non-negative integer, got '" + std::string(s) + "'");
      }
      cfg.override_seed(seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (name == "prepare") return cmd_prepare(cfg, opts);
  if (name == "stats") return cmd_stats(cfg, opts);
  if (name == "run") return cmd_run(cfg, opts);
  if (name == "evaluate") return cmd_evaluate(cfg, opts);
  return cmd_report(cfg, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Popularity-bias audit for book recommendation"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned jobs = 1;
  bool strict = false;
  std::string active;
  for (const char* name : {"prepare", "stats", "run", "evaluate", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--jobs", jobs, "parallel workers")->check(CLI::Range(1U, 1024U));
    sub->add_flag("--strict", strict, "treat data problems as errors");
    sub->callback([&active, name] { active = name; });
  }
  app.get_subcommand("prepare")->description("parse and filter the raw ratings file");
  app.get_subcommand("stats")->description("item popularity, user profiles and groups");
  app.get_subcommand("run")->description("split, fit every configured model and write top-n lists");
  app.get_subcommand("evaluate")->description("accuracy, popularity bias, significance and tradeoff files");
  app.get_subcommand("report")->description("print the text summaries");

  fairbook::SyntheticSpec synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("synth", "write a synthetic ratings file in the Book-Crossing format");
  gen->add_option("--out", synth_out, "output path")->required();
  gen->add_option("--users", synth.n_users);
  gen->add_option("--items", synth.n_items);
  gen->add_option("--seed", synth.seed);
  gen->callback([&active] { active = "synth"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fairbook::kExitInput;
  }

  if (active == "synth") {
    try {
      fairbook::csv::write_atomic(synth_out, fairbook::generate_bx_ratings(synth));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return fairbook::kExitInput;
    }
    return 0;
  }
  fairbook::CommandOptions opts;
  opts.jobs = jobs;
  opts.strict = strict;
  return run_command(active, config_path, opts);
}
