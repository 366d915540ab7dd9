#include "fairbook/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "fairbook/checksum.hpp"
#include "fairbook/csv.hpp"
#include "fairbook/dataset.hpp"
#include "fairbook/error.hpp"
#include "fairbook/evaluation.hpp"
#include "fairbook/manifest.hpp"
#include "fairbook/profiling.hpp"
#include "fairbook/rating_matrix.hpp"

namespace fairbook {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const char* kManifestFile = "manifest.txt";

struct Context {
  const RunConfig& config;
  const CommandOptions& options;
  fs::path dir;
  Manifest manifest;
  Clock::time_point start = Clock::now();

  Context(const RunConfig& c, const CommandOptions& o) : config(c), options(o), dir(c.output) {}

  std::ostream& out() const { return *options.out; }
  std::ostream& err() const { return *options.err; }
  bool strict() const { return config.strict || options.strict; }
  fs::path file(const std::string& name) const { return dir / name; }

  void load_manifest() { manifest = Manifest::load(file(kManifestFile)); }

  void stamp(const std::string& command) {
    manifest.set("tool.version", kToolVersion);
    manifest.set("config.hash", config.hash());
    manifest.set("seed", std::to_string(config.seed));
    manifest.set("seed.source", config.seed_override ? "FAIRBOOK_SEED" : "config");
    manifest.set("split.ratio", csv::fmt(config.split_ratio));
    manifest.set("split.mode", std::string(split_mode_name(config.split_mode)));
    manifest.set("evaluation.n", std::to_string(config.n));
    for (const auto& [k, v] : decision_switches()) manifest.set(k, v);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    manifest.set("timing." + command + "_ms", std::to_string(ms));
  }

  void save_manifest() const { manifest.save(file(kManifestFile)); }

  void write(const std::string& name, std::string_view content) const { csv::write_atomic(file(name), content); }

  // Checks that `name` still has the checksum recorded under `key`.
  void verify(const std::string& key, const std::string& name, const std::string& produced_by) const {
    const auto want = manifest.get(key);
    if (!want) throw IngestError(file(name).string() + ": not recorded in the manifest; run '" + produced_by + "' first");
    const auto have = file_checksum(file(name));
    if (have.empty()) throw IngestError(file(name).string() + ": missing; run '" + produced_by + "' first");
    if (have != *want) {
      throw IngestError(file(name).string() + ": checksum " + have + " does not match the manifest (" + *want +
                        "); rerun '" + produced_by + "'");
    }
  }
};

template <typename Body>
int guarded(Context& ctx, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    ctx.err() << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    ctx.err() << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

// Runs task(k) for k in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < n; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) task(k);
    });
  }
}

std::string percent(double x) { return csv::fmt(100.0 * x); }

Dataset load_prepared(Context& ctx) {
  ctx.verify("dataset.checksum", "dataset.csv", "prepare");
  ctx.verify("dataset.users_checksum", "idmap_users.csv", "prepare");
  ctx.verify("dataset.items_checksum", "idmap_items.csv", "prepare");
  return read_dataset(ctx.dir);
}

std::string stats_line(const DatasetStats& s) {
  std::ostringstream o;
  o << "sparsity=" << csv::fmt(100.0 * s.sparsity) << "% interactions_per_user=" << csv::fmt(s.interactions_per_user)
    << " interactions_per_item=" << csv::fmt(s.interactions_per_item);
  return o.str();
}

// ---------------------------------------------------------------------------

struct ModelOutcome {
  bool ok = false;
  std::string error;
  std::string recs_checksum;
  std::string scores_checksum;
  bool rating_scale = false;
  std::size_t cold_fallback = 0;
  std::size_t epochs_recorded = 0;
  double final_objective = std::nan("");
  long long fit_ms = 0;
  std::vector<std::string> warnings;
};

std::string test_scores_csv(std::span<const TestScore> rows) {
  std::string out = "user_index,item_index,rating,score\n";
  for (const auto& r : rows) {
    out += std::to_string(r.user) + ',' + std::to_string(r.item) + ',' + std::to_string(r.rating) + ',' +
           csv::fmt(r.score) + '\n';
  }
  return out;
}

std::vector<TestScore> read_test_scores(const fs::path& path) {
  std::vector<TestScore> out;
  for (const auto& row : csv::read_table(path, "user_index,item_index,rating,score")) {
    if (row.size() != 4) throw IngestError(path.string() + ": expected 4 fields");
    TestScore s;
    s.user = static_cast<UserIndex>(std::stoul(row[0]));
    s.item = static_cast<ItemIndex>(std::stoul(row[1]));
    s.rating = std::stoi(row[2]);
    s.score = std::stod(row[3]);
    out.push_back(s);
  }
  return out;
}

ModelOutcome run_model(const ModelEntry& entry, const RatingMatrix& train, const RatingMatrix& test,
                       const Context& ctx, unsigned user_jobs) {
  ModelOutcome res;
  const auto t0 = Clock::now();
  try {
    FitTrace trace;
    const auto model = fit(entry.config, train, &trace);
    const auto recs = recommend_top_n(*model, train, ctx.config.n, {}, user_jobs);
    const auto violations = list_violations(recs, train);
    if (!violations.empty()) throw FitError("recommendation list invariant broken: " + violations.front());
    const auto scores = score_test_pairs(*model, test);

    const std::string recs_text = recommendations_csv(recs);
    const std::string scores_text = test_scores_csv(scores);
    std::string trace_text = "epoch,objective,min_factor\n";
    for (std::size_t e = 0; e < trace.objective.size(); ++e) {
      trace_text += std::to_string(e) + ',' + csv::fmt_exact(trace.objective[e]) + ',' +
                    (e < trace.min_factor.size() ? csv::fmt_exact(trace.min_factor[e]) : "") + '\n';
    }
    ctx.write("recs_" + entry.name + ".csv", recs_text);
    ctx.write("test_scores_" + entry.name + ".csv", scores_text);
    ctx.write("trace_" + entry.name + ".csv", trace_text);

    res.ok = true;
    res.recs_checksum = checksum_hex(recs_text);
    res.scores_checksum = checksum_hex(scores_text);
    res.rating_scale = model->rating_scale();
    for (const auto& ur : recs.users) res.cold_fallback += ur.cold_fallback ? 1 : 0;
    res.epochs_recorded = trace.objective.size();
    if (!trace.objective.empty()) res.final_objective = trace.objective.back();
    res.warnings = trace.warnings;
    for (const auto& w : recs.warnings) res.warnings.push_back(w);
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
    std::error_code ec;
    for (const auto& prefix : {"recs_", "test_scores_", "trace_"}) {
      fs::remove(ctx.file(std::string(prefix) + entry.name + ".csv"), ec);
    }
  }
  res.fit_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  return res;
}

void record_model_config(Manifest& m, const ModelEntry& e) {
  const std::string p = "model." + e.name + ".";
  const auto& c = e.config;
  m.set(p + "algorithm", std::string(algorithm_name(c.algorithm)));
  m.set(p + "seed", std::to_string(c.seed));
  switch (c.algorithm) {
    case Algorithm::Random:
    case Algorithm::MostPop:
      break;
    case Algorithm::UserKNN:
      m.set(p + "neighbors", std::to_string(c.neighbors));
      break;
    case Algorithm::MF:
    case Algorithm::PMF:
    case Algorithm::BPR:
      m.set(p + "k", std::to_string(c.k));
      m.set(p + "learning_rate", csv::fmt(c.learning_rate));
      m.set(p + "regularization", csv::fmt(c.regularization));
      m.set(p + "epochs", std::to_string(c.epochs));
      break;
    case Algorithm::NMF:
      m.set(p + "k", std::to_string(c.k));
      m.set(p + "regularization", csv::fmt(c.regularization));
      m.set(p + "epochs", std::to_string(c.epochs));
      break;
    case Algorithm::WMF:
      m.set(p + "k", std::to_string(c.k));
      m.set(p + "alpha", csv::fmt(c.alpha));
      m.set(p + "regularization", csv::fmt(c.regularization));
      m.set(p + "epochs", std::to_string(c.epochs));
      break;
    case Algorithm::PF:
      m.set(p + "k", std::to_string(c.k));
      m.set(p + "prior_shape", csv::fmt(c.prior_shape));
      m.set(p + "prior_rate", csv::fmt(c.prior_rate));
      m.set(p + "epochs", std::to_string(c.epochs));
      break;
  }
}

// ---------------------------------------------------------------------------

struct Evaluated {
  std::string name;
  bool has_mae = false;
  std::array<GapRow, 3> gap;
  std::array<double, 3> mean_ndcg{};
};

const std::array<const char*, 4> kMetricNames = {"mae", "precision", "recall", "ndcg"};

}  // namespace

int cmd_prepare(const RunConfig& config, const CommandOptions& options) {
  Context ctx(config, options);
  return guarded(ctx, [&] {
    if (config.ratings.empty()) throw IngestError("no ratings file configured ([data] ratings)");
    if (!fs::is_regular_file(config.ratings)) throw IngestError("ratings file not found: " + config.ratings.string());
    const auto parsed = parse_ratings_file(config.ratings, ctx.strict());
    const auto [dataset, prov] = preprocess(parsed);

    fs::create_directories(ctx.dir);
    ctx.load_manifest();
    write_dataset(dataset, ctx.dir);
    ctx.write("provenance.txt", prov.report());
    const auto stats = dataset_stats(dataset);

    ctx.manifest.set("raw.path", config.ratings.string());
    ctx.manifest.set("raw.checksum", file_checksum(config.ratings));
    ctx.manifest.set("dataset.checksum", file_checksum(ctx.file("dataset.csv")));
    ctx.manifest.set("dataset.users_checksum", file_checksum(ctx.file("idmap_users.csv")));
    ctx.manifest.set("dataset.items_checksum", file_checksum(ctx.file("idmap_items.csv")));
    ctx.manifest.set("dataset.users", std::to_string(stats.n_users));
    ctx.manifest.set("dataset.items", std::to_string(stats.n_items));
    ctx.manifest.set("dataset.interactions", std::to_string(stats.n_interactions));
    ctx.stamp("prepare");
    ctx.save_manifest();

    ctx.out() << "users=" << stats.n_users << " items=" << stats.n_items << " interactions=" << stats.n_interactions
              << "\n"
              << stats_line(stats) << "\n";
    if (prov.malformed > 0) ctx.err() << "warning: skipped " << prov.malformed << " malformed lines\n";
    return kExitOk;
  });
}

int cmd_stats(const RunConfig& config, const CommandOptions& options) {
  Context ctx(config, options);
  return guarded(ctx, [&] {
    ctx.load_manifest();
    const Dataset d = load_prepared(ctx);
    const auto pop = compute_item_popularity(d);
    const auto stats = user_profile_stats(d, pop);
    const auto groups = assign_groups(stats);

    std::string items = "item_index,reader_count,phi,is_popular\n";
    for (ItemIndex i = 0; i < d.n_items(); ++i) {
      items += std::to_string(i) + ',' + std::to_string(pop.reader_count[i]) + ',' + csv::fmt(pop.phi[i]) + ',' +
               (pop.is_popular[i] ? "1" : "0") + '\n';
    }
    ctx.write("item_popularity.csv", items);

    std::string users = "user_index,profile_size,n_popular,ratio_popular,avg_item_popularity,group\n";
    for (UserIndex u = 0; u < d.n_users(); ++u) {
      const auto& s = stats[u];
      users += std::to_string(u) + ',' + std::to_string(s.profile_size) + ',' +
               std::to_string(s.n_popular) + ',' + csv::fmt(s.ratio_popular) + ',' + csv::fmt(s.avg_item_popularity) +
               ',' + std::string(group_name(groups.label[u])) + '\n';
    }
    ctx.write("user_stats.csv", users);

    std::string longtail = "rank,reader_count\n";
    for (const auto& [rank, count] : longtail_series(pop)) {
      longtail += std::to_string(rank) + ',' + std::to_string(count) + '\n';
    }
    ctx.write("fig1a_longtail.csv", longtail);

    std::string hist = "bin_low,bin_high,user_count\n";
    for (const auto& b : ratio_histogram(stats)) {
      hist += csv::fmt(b.low) + ',' + csv::fmt(b.high) + ',' + std::to_string(b.count) + '\n';
    }
    ctx.write("fig1b_ratio_hist.csv", hist);

    const auto [size_vs_popular, size_vs_avg] = profile_popularity_correlations(stats);
    std::string corr = "pair,r,p,n\n";
    corr += "profile_size~n_popular," + csv::fmt(size_vs_popular.r) + ',' + csv::fmt(size_vs_popular.p) + ',' +
            std::to_string(size_vs_popular.n) + '\n';
    corr += "profile_size~avg_item_popularity," + csv::fmt(size_vs_avg.r) + ',' + csv::fmt(size_vs_avg.p) + ',' +
            std::to_string(size_vs_avg.n) + '\n';
    ctx.write("profile_correlations.csv", corr);

    const auto summary = group_profile_summary(stats, groups);
    std::string grp = "group,users,mean_profile_size\n";
    for (auto g : kAllGroups) {
      const int k = static_cast<int>(g);
      grp += std::string(group_name(g)) + ',' + std::to_string(summary.users[k]) + ',' +
             csv::fmt(summary.mean_profile_size[k]) + '\n';
    }
    ctx.write("group_profiles.csv", grp);

    const std::size_t le80 = count_users_ratio_at_most(stats, 0.8);
    const double share = static_cast<double>(le80) / static_cast<double>(d.n_users());
    const auto ds = dataset_stats(d);
    std::ostringstream txt;
    txt << "users=" << ds.n_users << " items=" << ds.n_items << " interactions=" << ds.n_interactions << "\n"
        << stats_line(ds) << "\n"
        << "popular_items=" << pop.n_popular << "\n"
        << "users_ratio_popular_le_0.8=" << le80 << "\n"
        << "pct_users_with_unpopular_ge20 = " << percent(share) << "%\n"
        << "group_sizes niche=" << groups.size(UserGroup::Niche) << " diverse=" << groups.size(UserGroup::Diverse)
        << " bestseller=" << groups.size(UserGroup::BestsellerFocused) << "\n"
        << "mean_profile_size niche=" << csv::fmt(summary.mean_profile_size[0])
        << " diverse=" << csv::fmt(summary.mean_profile_size[1])
        << " bestseller=" << csv::fmt(summary.mean_profile_size[2]) << "\n"
        << "r(profile_size,n_popular)=" << csv::fmt(size_vs_popular.r) << " p=" << csv::fmt(size_vs_popular.p) << "\n"
        << "r(profile_size,avg_item_popularity)=" << csv::fmt(size_vs_avg.r) << " p=" << csv::fmt(size_vs_avg.p)
        << "\n";
    ctx.write("stats_summary.txt", txt.str());

    ctx.manifest.set("stats.user_stats_checksum", file_checksum(ctx.file("user_stats.csv")));
    ctx.stamp("stats");
    ctx.save_manifest();
    ctx.out() << txt.str();
    return kExitOk;
  });
}

int cmd_run(const RunConfig& config, const CommandOptions& options) {
  Context ctx(config, options);
  return guarded(ctx, [&] {
    ctx.load_manifest();
    const Dataset d = load_prepared(ctx);
    const auto split = split_train_test(d, config.split_ratio, config.seed, config.split_mode);
    ctx.write("split_train.csv", interactions_csv(split.train));
    ctx.write("split_test.csv", interactions_csv(split.test));
    std::string cold = "user_index\n";
    std::size_t n_cold_users = 0, n_cold_items = 0;
    for (UserIndex u = 0; u < d.n_users(); ++u) {
      if (split.cold_user[u]) {
        cold += std::to_string(u) + '\n';
        ++n_cold_users;
      }
    }
    for (bool c : split.cold_item) n_cold_items += c ? 1 : 0;
    ctx.write("cold_users.csv", cold);

    const RatingMatrix train(d.n_users(), d.n_items(), split.train);
    const RatingMatrix test(d.n_users(), d.n_items(), split.test);
    const std::string dataset_checksum = *ctx.manifest.get("dataset.checksum");
    ctx.manifest.set("split.seed", std::to_string(split.seed));
    ctx.manifest.set("split.train_checksum", file_checksum(ctx.file("split_train.csv")));
    ctx.manifest.set("split.test_checksum", file_checksum(ctx.file("split_test.csv")));
    ctx.manifest.set("split.train_size", std::to_string(split.train.size()));
    ctx.manifest.set("split.test_size", std::to_string(split.test.size()));
    ctx.manifest.set("split.cold_users", std::to_string(n_cold_users));
    ctx.manifest.set("split.cold_items", std::to_string(n_cold_items));

    const auto& models = config.models;
    const unsigned jobs = std::max(1U, options.jobs);
    const unsigned model_jobs = std::min<unsigned>(jobs, static_cast<unsigned>(models.size()));
    const unsigned user_jobs = std::max(1U, jobs / std::max(1U, model_jobs));
    std::vector<ModelOutcome> outcomes(models.size());
    std::mutex log_mutex;
    parallel_for(models.size(), model_jobs, [&](std::size_t k) {
      outcomes[k] = run_model(models[k], train, test, ctx, user_jobs);
      std::lock_guard lock(log_mutex);
      if (outcomes[k].ok) {
        ctx.err() << "fitted " << models[k].name << " in " << outcomes[k].fit_ms << " ms\n";
      } else {
        ctx.err() << "model " << models[k].name << " failed: " << outcomes[k].error << "\n";
      }
    });

    ctx.manifest.erase_prefix("recs.");
    ctx.manifest.erase_prefix("model.");
    ctx.manifest.erase_prefix("timing.fit.");
    std::string names;
    std::size_t failed = 0;
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto& e = models[k];
      const auto& o = outcomes[k];
      names += (names.empty() ? "" : ",") + e.name;
      record_model_config(ctx.manifest, e);
      const std::string p = "recs." + e.name + ".";
      ctx.manifest.set("timing.fit." + e.name + "_ms", std::to_string(o.fit_ms));
      if (!o.ok) {
        ++failed;
        std::string msg = o.error;
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        ctx.manifest.set(p + "status", "failed: " + msg);
        continue;
      }
      ctx.manifest.set(p + "status", "ok");
      ctx.manifest.set(p + "checksum", o.recs_checksum);
      ctx.manifest.set(p + "scores_checksum", o.scores_checksum);
      ctx.manifest.set(p + "dataset_checksum", dataset_checksum);
      ctx.manifest.set(p + "rating_scale", o.rating_scale ? "1" : "0");
      ctx.manifest.set(p + "cold_fallback_users", std::to_string(o.cold_fallback));
      ctx.manifest.set(p + "warnings", std::to_string(o.warnings.size()));
      if (!std::isnan(o.final_objective)) ctx.manifest.set(p + "final_objective", csv::fmt(o.final_objective));
      for (const auto& w : o.warnings) ctx.err() << "warning: " << e.name << ": " << w << "\n";
    }
    ctx.manifest.set("run.models", names);
    ctx.stamp("run");
    ctx.save_manifest();
    ctx.out() << "models=" << models.size() << " failed=" << failed << " train=" << split.train.size()
              << " test=" << split.test.size() << " cold_users=" << n_cold_users << "\n";
    return failed > 0 ? kExitPartial : kExitOk;
  });
}

int cmd_evaluate(const RunConfig& config, const CommandOptions& options) {
  Context ctx(config, options);
  return guarded(ctx, [&] {
    ctx.load_manifest();
    const Dataset d = load_prepared(ctx);
    ctx.verify("split.train_checksum", "split_train.csv", "run");
    ctx.verify("split.test_checksum", "split_test.csv", "run");
    const auto train_rows = read_interactions(ctx.file("split_train.csv"));
    const auto test_rows = read_interactions(ctx.file("split_test.csv"));
    const RatingMatrix train(d.n_users(), d.n_items(), train_rows);
    const RatingMatrix test(d.n_users(), d.n_items(), test_rows);
    const std::string dataset_checksum = *ctx.manifest.get("dataset.checksum");

    const auto pop = compute_item_popularity(d);
    const auto stats = user_profile_stats(d, pop);
    const auto groups = assign_groups(stats);
    const auto profiles = d.profiles();

    struct Source {
      std::string name;
      fs::path path;
      bool internal;
    };
    std::vector<Source> sources;
    std::size_t skipped = 0;
    for (const auto& m : config.models) {
      const auto status = ctx.manifest.get("recs." + m.name + ".status");
      if (!status) throw IngestError("model '" + m.name + "' has no recommendations recorded; run 'run' first");
      if (*status != "ok") {
        ctx.err() << "warning: skipping " << m.name << " (" << *status << ")\n";
        ++skipped;
        continue;
      }
      const std::string recs_name = "recs_" + m.name + ".csv";
      const auto recorded = ctx.manifest.get("recs." + m.name + ".dataset_checksum");
      if (!recorded || *recorded != dataset_checksum) {
        throw IngestError(ctx.file(recs_name).string() + ": produced for a different dataset (checksum " +
                          recorded.value_or("none") + ", current " + dataset_checksum + ")");
      }
      ctx.verify("recs." + m.name + ".checksum", recs_name, "run");
      ctx.verify("recs." + m.name + ".scores_checksum", "test_scores_" + m.name + ".csv", "run");
      sources.push_back({m.name, ctx.file(recs_name), true});
    }
    for (const auto& e : config.externals) {
      if (!fs::is_regular_file(e.path)) throw IngestError("external recommendations not found: " + e.path.string());
      sources.push_back({e.name, e.path, false});
    }

    std::vector<Evaluated> results(sources.size());
    std::vector<std::string> significance_rows(sources.size());
    std::vector<std::string> freq_rows(sources.size());
    std::vector<std::string> warnings(sources.size());
    std::vector<std::exception_ptr> failures(sources.size());

    parallel_for(sources.size(), std::max(1U, options.jobs), [&](std::size_t k) {
      try {
        const auto& src = sources[k];
        auto imported = import_recommendations(src.path, d.n_users(), d.n_items(), &train, ctx.strict());
        for (const auto& e : imported.errors) warnings[k] += "warning: " + src.path.string() + ": " + e + "\n";
        const auto& recs = imported.list;
        if (recs.users.empty()) throw ValidationError(src.path.string() + ": no usable recommendation lists");

        const auto ranked = rank_metrics(recs, test, config.n);
        std::vector<double> mae_by_user(d.n_users(), std::nan(""));
        Evaluated& ev = results[k];
        ev.name = src.name;
        if (src.internal) {
          const auto scores = read_test_scores(ctx.file("test_scores_" + src.name + ".csv"));
          const bool scale = ctx.manifest.get("recs." + src.name + ".rating_scale").value_or("0") == "1";
          for (const auto& m : mae_per_user(scores, scale)) mae_by_user[m.user] = m.mae;
          ev.has_mae = true;
        }

        std::array<std::vector<double>, 4> by_user;
        for (auto& v : by_user) v.assign(d.n_users(), std::nan(""));
        by_user[0] = mae_by_user;
        std::string acc = "user_index,group,mae,precision,recall,ndcg\n";
        for (const auto& r : ranked) {
          by_user[1][r.user] = r.precision;
          by_user[2][r.user] = r.recall;
          by_user[3][r.user] = r.ndcg;
          const double mae = mae_by_user[r.user];
          acc += std::to_string(r.user) + ',' + std::string(group_name(groups.label[r.user])) + ',' +
                 (std::isnan(mae) ? std::string() : csv::fmt(mae)) + ',' + csv::fmt(r.precision) + ',' +
                 csv::fmt(r.recall) + ',' + csv::fmt(r.ndcg) + '\n';
        }
        ctx.write("accuracy_" + src.name + ".csv", acc);

        for (auto g : kAllGroups) {
          std::vector<double> v;
          for (UserIndex u : groups.users(g)) {
            if (!std::isnan(by_user[3][u])) v.push_back(by_user[3][u]);
          }
          ev.mean_ndcg[static_cast<int>(g)] = v.empty() ? std::nan("") : mean(v);
        }

        for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
          if (m == 0 && !ev.has_mae) continue;
          try {
            for (const auto& row : group_significance_test(by_user[m], groups)) {
              significance_rows[k] += src.name + '.' + kMetricNames[m] + ',' + std::string(group_name(row.a)) + ',' +
                                      std::string(group_name(row.b)) + ',' + csv::fmt(row.test.t) + ',' +
                                      csv::fmt(row.test.p) + ',' + (row.significant ? "1" : "0") + '\n';
            }
          } catch (const ContractError& e) {
            warnings[k] += "warning: " + src.name + "." + kMetricNames[m] + ": " + e.what() + "\n";
          }
        }

        ev.gap = gap_report(groups, profiles, recs.item_lists(d.n_users()), pop.phi);

        std::vector<std::size_t> counts(d.n_items(), 0);
        for (const auto& ur : recs.users) {
          for (const auto& s : ur.items) ++counts[s.item];
        }
        std::string freq = "item_index,phi,rec_count\n";
        for (ItemIndex i = 0; i < d.n_items(); ++i) {
          freq += std::to_string(i) + ',' + csv::fmt(pop.phi[i]) + ',' + std::to_string(counts[i]) + '\n';
        }
        ctx.write("freq_" + src.name + ".csv", freq);
        try {
          const auto fr = recommendation_frequency_correlation(recs, pop.phi);
          freq_rows[k] = src.name + ',' + csv::fmt(fr.correlation.r) + ',' + csv::fmt(fr.correlation.p) + ',' +
                         std::to_string(fr.correlation.n) + '\n';
        } catch (const UndefinedCorrelation&) {
          freq_rows[k] = src.name + ",nan,nan," + std::to_string(d.n_items()) + '\n';
        }
      } catch (...) {
        failures[k] = std::current_exception();
      }
    });
    for (const auto& w : warnings) ctx.err() << w;
    // A source that cannot be evaluated is skipped unless running strict.
    std::vector<Evaluated> kept;
    std::vector<std::string> kept_sig, kept_freq;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      if (failures[k]) {
        if (ctx.strict()) std::rethrow_exception(failures[k]);
        try {
          std::rethrow_exception(failures[k]);
        } catch (const std::exception& e) {
          ctx.err() << "warning: skipping " << sources[k].name << ": " << e.what() << "\n";
        }
        ++skipped;
        continue;
      }
      kept.push_back(std::move(results[k]));
      kept_sig.push_back(std::move(significance_rows[k]));
      kept_freq.push_back(std::move(freq_rows[k]));
    }
    results = std::move(kept);
    significance_rows = std::move(kept_sig);
    freq_rows = std::move(kept_freq);
    if (results.empty()) throw ValidationError("no recommendation source could be evaluated");

    std::string gap_csv = "algorithm,group,gap_p,gap_r,delta_gap_ratio,delta_gap_pct\n";
    std::string summary_csv = "algorithm,group,users,metric,mean,sd\n";
    std::string significance = "metric,group_a,group_b,t,p,significant\n";
    std::string freq_summary = "algorithm,r,p,n\n";
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& ev = results[k];
      for (const auto& row : ev.gap) {
        gap_csv += ev.name + ',' + std::string(group_name(row.group)) + ',' + csv::fmt(row.gap_p) + ',' +
                   csv::fmt(row.gap_r) + ',' + csv::fmt(row.delta.ratio) + ',' + csv::fmt(row.delta.pct) + '\n';
      }
      significance += significance_rows[k];
      freq_summary += freq_rows[k];
    }

    // Per-group means come from the accuracy files just written.
    std::ostringstream table;
    table << "fairbook evaluation summary\n"
          << "significance: Welch two-sample two-tailed t-test (groups are disjoint user sets), alpha 0.05\n"
          << "mae: clamped to [1,10]; ranking models marked * are min-max rescaled over test pairs first\n"
          << "delta_gap: ratio (gap_r - gap_p) / gap_p and the same value x100 as percent\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-10s %6s %9s %9s %9s %9s %11s %11s\n", "algorithm", "group", "users",
                  "mae", "prec@n", "recall@n", "ndcg@n", "dgap_ratio", "dgap_pct");
    table << line;
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& ev = results[k];
      const auto rows = csv::read_table(ctx.file("accuracy_" + ev.name + ".csv"),
                                        "user_index,group,mae,precision,recall,ndcg");
      const bool scaled = ev.has_mae && ctx.manifest.get("recs." + ev.name + ".rating_scale").value_or("0") == "0";
      for (auto g : kAllGroups) {
        std::array<std::vector<double>, 4> values;
        for (const auto& r : rows) {
          if (r[1] != group_name(g)) continue;
          for (std::size_t m = 0; m < 4; ++m) {
            if (!r[2 + m].empty()) values[m].push_back(std::stod(r[2 + m]));
          }
        }
        std::array<MetricSummary, 4> s;
        for (std::size_t m = 0; m < 4; ++m) {
          s[m] = summarize(values[m]);
          if (m == 0 && !ev.has_mae) continue;
          summary_csv += ev.name + ',' + std::string(group_name(g)) + ',' + std::to_string(s[m].n) + ',' +
                         kMetricNames[m] + ',' + csv::fmt(s[m].mean) + ',' + csv::fmt(s[m].sd) + '\n';
        }
        const auto& gr = ev.gap[static_cast<int>(g)];
        std::string mae = ev.has_mae ? csv::fmt(s[0].mean) + (scaled ? "*" : "") : "-";
        std::snprintf(line, sizeof line, "%-12s %-10s %6zu %9s %9s %9s %9s %11s %11s\n", ev.name.c_str(),
                      std::string(group_name(g)).c_str(), s[3].n, mae.c_str(), csv::fmt(s[1].mean).c_str(),
                      csv::fmt(s[2].mean).c_str(), csv::fmt(s[3].mean).c_str(), csv::fmt(gr.delta.ratio).c_str(),
                      csv::fmt(gr.delta.pct).c_str());
        table << line;
      }
    }

    std::string tradeoff_summary = "group,r,p,n\n";
    table << "\ntradeoff (pearson of per-algorithm mean ndcg@n vs delta_gap):\n";
    for (auto g : kAllGroups) {
      const int gi = static_cast<int>(g);
      std::string rows = "algorithm,ndcg,delta_gap_pct\n";
      std::vector<double> xs, ys;
      for (const auto& ev : results) {
        rows += ev.name + ',' + csv::fmt(ev.mean_ndcg[gi]) + ',' + csv::fmt(ev.gap[gi].delta.pct) + '\n';
        if (!std::isnan(ev.mean_ndcg[gi])) {
          xs.push_back(ev.mean_ndcg[gi]);
          ys.push_back(ev.gap[gi].delta.pct);
        }
      }
      ctx.write("tradeoff_" + std::string(group_name(g)) + ".csv", rows);
      std::string entry;
      if (xs.size() >= 3) {
        try {
          const auto c = tradeoff_correlation(xs, ys);
          entry = csv::fmt(c.r) + ',' + csv::fmt(c.p) + ',' + std::to_string(c.n);
        } catch (const UndefinedCorrelation&) {
          entry = "nan,nan," + std::to_string(xs.size());
        }
      } else {
        entry = "nan,nan," + std::to_string(xs.size());
      }
      tradeoff_summary += std::string(group_name(g)) + ',' + entry + '\n';
      table << "  " << group_name(g) << ": r,p,n = " << entry << "\n";
    }

    table << "\npopularity vs recommendation frequency (pearson over items):\n";
    for (const auto& row : freq_rows) table << "  " << row;

    ctx.write("gap_report.csv", gap_csv);
    ctx.write("accuracy_summary.csv", summary_csv);
    ctx.write("significance.csv", significance);
    ctx.write("freq_summary.csv", freq_summary);
    ctx.write("tradeoff_summary.csv", tradeoff_summary);
    ctx.write("summary.txt", table.str());

    ctx.manifest.erase_prefix("evaluate.");
    ctx.manifest.set("evaluate.algorithms", std::to_string(results.size()));
    ctx.manifest.set("evaluate.skipped", std::to_string(skipped));
    ctx.manifest.set("evaluate.summary_checksum", file_checksum(ctx.file("summary.txt")));
    ctx.stamp("evaluate");
    ctx.save_manifest();
    ctx.out() << table.str();
    return skipped > 0 ? kExitPartial : kExitOk;
  });
}

int cmd_report(const RunConfig& config, const CommandOptions& options) {
  Context ctx(config, options);
  return guarded(ctx, [&] {
    bool any = false;
    for (const char* name : {"provenance.txt", "stats_summary.txt", "summary.txt"}) {
      if (!fs::exists(ctx.file(name))) continue;
      any = true;
      ctx.out() << "== " << name << " ==\n" << csv::read_file(ctx.file(name)) << "\n";
    }
    if (!any) throw IngestError("nothing to report in " + ctx.dir.string() + "; run prepare/stats/evaluate first");
    return kExitOk;
  });
}

}  // namespace fairbook
