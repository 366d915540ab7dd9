#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <numeric>
#include <set>

#include "fairbook/error.hpp"
#include "fairbook/evaluation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fairbook;

namespace {

RecommendationList lists_of(const std::vector<std::vector<ItemIndex>>& by_user) {
  RecommendationList out;
  for (UserIndex u = 0; u < by_user.size(); ++u) {
    if (by_user[u].empty()) continue;
    UserRecommendations ur;
    ur.user = u;
    double s = 100.0;
    for (ItemIndex i : by_user[u]) ur.items.push_back({i, s--});
    out.users.push_back(ur);
  }
  return out;
}

GroupAssignment groups_from(const std::vector<UserGroup>& labels) {
  GroupAssignment g;
  g.label = labels;
  for (UserIndex u = 0; u < labels.size(); ++u) g.members[static_cast<int>(labels[u])].push_back(u);
  return g;
}

}  // namespace

// ---------------------------------------------------------------- split

TEST_CASE("global split sizes and partition") {
  std::vector<Interaction> rows;
  const std::size_t total = 88552;
  for (std::size_t k = 0; k < total; ++k) {
    rows.push_back({static_cast<UserIndex>(k % 2000), static_cast<ItemIndex>(k / 2000), static_cast<int>(1 + k % 10)});
  }
  const auto d = testing::make_dataset(2000, 45, rows);
  const auto s = split_train_test(d, 0.8, 42);
  CHECK(s.train.size() == 70841);
  CHECK(s.test.size() == total - 70841);

  auto key = [](const Interaction& x) { return (static_cast<std::uint64_t>(x.user) << 32) | x.item; };
  std::set<std::uint64_t> seen;
  for (auto& x : s.train) seen.insert(key(x));
  for (auto& x : s.test) CHECK(seen.insert(key(x)).second);
  CHECK(seen.size() == total);
}

TEST_CASE("split of ten interactions at one half") {
  std::vector<Interaction> rows;
  for (UserIndex u = 0; u < 10; ++u) rows.push_back({u, 0, 5});
  const auto d = testing::make_dataset(10, 1, rows);
  const auto s = split_train_test(d, 0.5, 1);
  CHECK(s.train.size() == 5);
  CHECK(s.test.size() == 5);
  std::size_t cold = std::count(s.cold_user.begin(), s.cold_user.end(), true);
  CHECK(cold == 5);
}

TEST_CASE("split is seeded and keeps dataset order") {
  const auto rows = testing::random_interactions(40, 30, 0.2, 8);
  const auto d = testing::make_dataset(40, 30, rows);
  const auto a = split_train_test(d, 0.8, 7), b = split_train_test(d, 0.8, 7), c = split_train_test(d, 0.8, 8);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train != c.train);
  auto position = [&](const Interaction& x) {
    return std::find(d.interactions().begin(), d.interactions().end(), x) - d.interactions().begin();
  };
  for (std::size_t k = 1; k < a.train.size(); ++k) CHECK(position(a.train[k - 1]) < position(a.train[k]));
  for (std::size_t k = 1; k < a.test.size(); ++k) CHECK(position(a.test[k - 1]) < position(a.test[k]));
}

TEST_CASE("per-user split applies the ratio inside each profile") {
  const auto rows = testing::random_interactions(25, 40, 0.3, 9);
  const auto d = testing::make_dataset(25, 40, rows);
  const auto s = split_train_test(d, 0.8, 3, SplitMode::PerUser);
  std::vector<std::size_t> all(25), train(25);
  for (auto& x : rows) ++all[x.user];
  for (auto& x : s.train) ++train[x.user];
  for (UserIndex u = 0; u < 25; ++u) {
    CHECK(train[u] == static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(all[u]))));
  }
  CHECK(parse_split_mode(split_mode_name(SplitMode::PerUser)) == SplitMode::PerUser);
  CHECK(parse_split_mode("stratified") == SplitMode::PerUser);
  CHECK_THROWS_AS(parse_split_mode("temporal"), ContractError);
}

TEST_CASE("cold flags") {
  TrainTestSplit s;
  s.train = {{0, 0, 5}, {0, 1, 5}};
  s.test = {{1, 2, 4}};
  mark_cold(s, 3, 3);
  CHECK(s.cold_user == std::vector<bool>{false, true, true});
  CHECK(s.cold_item == std::vector<bool>{false, false, true});
}

// ---------------------------------------------------------------- ranking metrics

TEST_CASE("hits at ranks 1 and 3 with four relevant items") {
  // Relevant: items 10, 11, 12, 13. List: 10, 20, 11, 21, 22, ...
  std::vector<Interaction> test_rows = {{0, 10, 5}, {0, 11, 5}, {0, 12, 5}, {0, 13, 5}};
  const RatingMatrix test(1, 40, test_rows);
  const auto recs = lists_of({{10, 20, 11, 21, 22, 23, 24, 25, 26, 27}});
  const auto m = rank_metrics(recs, test, 10);
  REQUIRE(m.size() == 1);
  CHECK(m[0].hits == 2);
  CHECK(m[0].precision == doctest::Approx(0.2));
  CHECK(m[0].recall == doctest::Approx(0.5));
  const double dcg = 1.0 + 1.0 / 2.0;
  const double idcg = 1.0 + 1.0 / std::log2(3.0) + 0.5 + 1.0 / std::log2(5.0);
  CHECK(m[0].ndcg == doctest::Approx(dcg / idcg).epsilon(1e-14));
}

TEST_CASE("perfect and empty lists") {
  const RatingMatrix test(3, 5, std::vector<Interaction>{{0, 1, 5}, {0, 2, 5}, {2, 4, 5}});
  const auto recs = lists_of({{2, 1, 0}, {}, {}});
  const auto m = rank_metrics(recs, test, 3);
  REQUIRE(m.size() == 2);  // user 1 has no test items
  CHECK(m[0].ndcg == doctest::Approx(1.0));
  CHECK(m[0].recall == 1.0);
  CHECK(m[0].precision == doctest::Approx(2.0 / 3.0));
  CHECK(m[1].user == 2);
  CHECK(m[1].ndcg == 0.0);
  CHECK(m[1].hits == 0);
}

TEST_CASE("rank metrics against a brute-force oracle on 100 seeded instances") {
  std::mt19937_64 gen(1234);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t nu = 1 + gen() % 8, ni = 15 + gen() % 20, n = 1 + gen() % 10;
    std::vector<Interaction> test_rows;
    std::vector<std::vector<ItemIndex>> lists(nu);
    std::vector<std::set<ItemIndex>> rel(nu);
    for (UserIndex u = 0; u < nu; ++u) {
      for (ItemIndex i = 0; i < ni; ++i) {
        if (gen() % 5 == 0) {
          test_rows.push_back({u, i, 5});
          rel[u].insert(i);
        }
      }
      std::vector<ItemIndex> perm(ni);
      std::iota(perm.begin(), perm.end(), 0U);
      std::shuffle(perm.begin(), perm.end(), gen);
      perm.resize(gen() % (n + 1));
      lists[u] = perm;
    }
    const RatingMatrix test(nu, ni, test_rows);
    const auto got = rank_metrics(lists_of(lists), test, n);
    std::size_t k = 0;
    for (UserIndex u = 0; u < nu; ++u) {
      if (rel[u].empty()) continue;
      REQUIRE(k < got.size());
      const auto& g = got[k++];
      CHECK(g.user == u);
      double hits = 0, dcg = 0, idcg = 0;
      for (std::size_t r = 0; r < lists[u].size(); ++r) {
        if (rel[u].count(lists[u][r])) {
          hits += 1;
          dcg += std::log(2.0) / std::log(r + 2.0);
        }
      }
      for (std::size_t r = 0; r < std::min<std::size_t>(n, rel[u].size()); ++r) idcg += std::log(2.0) / std::log(r + 2.0);
      CHECK(std::fabs(g.precision - hits / static_cast<double>(n)) < 1e-12);
      CHECK(std::fabs(g.recall - hits / static_cast<double>(rel[u].size())) < 1e-12);
      CHECK(std::fabs(g.ndcg - dcg / idcg) < 1e-12);
    }
    CHECK(k == got.size());
  }
}

// ---------------------------------------------------------------- MAE

TEST_CASE("MAE on the rating scale clamps to 1..10") {
  const std::vector<TestScore> s = {{0, 0, 8, 7.0}, {0, 1, 2, 4.0}, {1, 0, 10, 12.0}, {1, 1, 1, -3.0}};
  const auto m = mae_per_user(s, true);
  REQUIRE(m.size() == 2);
  CHECK(m[0].mae == doctest::Approx(1.5));
  CHECK(m[1].mae == doctest::Approx(0.0));
  CHECK(m[0].n == 2);
}

TEST_CASE("MAE of a constant ranking score maps to the scale midpoint") {
  const std::vector<TestScore> s = {{0, 0, 10, 0.3}, {0, 1, 1, 0.3}};
  const auto m = mae_per_user(s, false);
  CHECK(m[0].mae == doctest::Approx(4.5));
}

TEST_CASE("MAE of ranking scores rescales min-max over the pairs") {
  const std::vector<TestScore> s = {{0, 0, 1, -2.0}, {0, 1, 10, 4.0}, {1, 2, 5, 1.0}};
  const auto m = mae_per_user(s, false);
  CHECK(m[0].mae == doctest::Approx(0.0));
  CHECK(m[1].mae == doctest::Approx(0.5));
}

// ---------------------------------------------------------------- GAP

TEST_CASE("GAP by hand") {
  const std::vector<double> phi = {0.5, 0.1, 0.2, 0.9};
  const std::vector<std::vector<ItemIndex>> lists = {{0, 1}, {2}, {3, 3, 1}};
  const std::vector<UserIndex> g = {0, 1, 2};
  const double want = ((0.6 / 2) + 0.2 + (1.9 / 3)) / 3;
  CHECK(gap(g, lists, phi) == doctest::Approx(want).epsilon(1e-14));
  CHECK(gap(std::vector<UserIndex>{1}, lists, phi) == doctest::Approx(0.2));
  CHECK_THROWS_AS(gap(std::vector<UserIndex>{}, lists, phi), ContractError);
  const std::vector<std::vector<ItemIndex>> with_empty = {{}, {0}};
  CHECK_THROWS_AS(gap(std::vector<UserIndex>{0, 1}, with_empty, phi), ContractError);
}

TEST_CASE("GAP is linear in phi") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(20), b(20), mix(20);
  for (int i = 0; i < 20; ++i) {
    a[i] = u(gen);
    b[i] = u(gen);
    mix[i] = 2.0 * a[i] + 3.0 * b[i];
  }
  std::vector<std::vector<ItemIndex>> lists(6);
  for (auto& l : lists) {
    for (int k = 0; k < 5; ++k) l.push_back(static_cast<ItemIndex>(gen() % 20));
  }
  const std::vector<UserIndex> g = {0, 2, 3, 5};
  CHECK(gap(g, lists, mix) == doctest::Approx(2.0 * gap(g, lists, a) + 3.0 * gap(g, lists, b)).epsilon(1e-12));
}

TEST_CASE("delta GAP examples") {
  CHECK(delta_gap(0.3, 0.2).ratio == doctest::Approx(0.5));
  CHECK(delta_gap(0.3, 0.2).pct == doctest::Approx(50.0));
  CHECK(delta_gap(0.1, 0.2).pct == doctest::Approx(-50.0));
  CHECK(delta_gap(0.2, 0.2).ratio == 0.0);
  CHECK_THROWS_AS(delta_gap(0.1, 0.0), ContractError);
}

TEST_CASE("GAP report uses full profiles and the users that got a list") {
  const std::vector<double> phi = {0.8, 0.4, 0.1, 0.05};
  const auto groups = groups_from({UserGroup::Niche, UserGroup::Niche, UserGroup::Diverse,
                                   UserGroup::BestsellerFocused, UserGroup::BestsellerFocused});
  const std::vector<std::vector<ItemIndex>> profiles = {{2, 3}, {2}, {0, 3}, {0}, {0, 1}};
  const std::vector<std::vector<ItemIndex>> recs = {{0}, {}, {1}, {2}, {3}};
  const auto rep = gap_report(groups, profiles, recs, phi);
  CHECK(rep[0].gap_p == doctest::Approx((0.075 + 0.1) / 2));
  CHECK(rep[0].gap_r == doctest::Approx(0.8));
  CHECK(rep[1].gap_p == doctest::Approx(0.425));
  CHECK(rep[2].gap_p == doctest::Approx((0.8 + 0.6) / 2));
  CHECK(rep[2].gap_r == doctest::Approx(0.075));
  CHECK(rep[0].delta.pct == doctest::Approx(100.0 * (0.8 - 0.0875) / 0.0875));
  CHECK(rep[2].group == UserGroup::BestsellerFocused);
}

// ---------------------------------------------------------------- frequency and significance

TEST_CASE("recommendation counts proportional to readers correlate perfectly") {
  const std::vector<double> phi = {0.1, 0.4, 0.2, 0.3};
  // Item i appears in 10 * phi_i lists.
  std::vector<std::vector<ItemIndex>> lists(4);
  lists[0] = {1, 3, 2, 0};
  lists[1] = {1, 3, 2};
  lists[2] = {1, 3};
  lists[3] = {1};
  const auto rep = recommendation_frequency_correlation(lists_of(lists), phi);
  CHECK(rep.rec_count == std::vector<std::size_t>{1, 4, 2, 3});
  CHECK(rep.correlation.r == doctest::Approx(1.0));
  CHECK(rep.correlation.n == 4);
}

TEST_CASE("frequency correlation matches the oracle on random lists") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<double> phi(30);
    for (auto& p : phi) p = u(gen);
    std::vector<std::vector<ItemIndex>> lists(12);
    for (auto& l : lists) {
      std::vector<ItemIndex> perm(30);
      std::iota(perm.begin(), perm.end(), 0U);
      std::shuffle(perm.begin(), perm.end(), gen);
      l.assign(perm.begin(), perm.begin() + 5);
    }
    const auto rep = recommendation_frequency_correlation(lists_of(lists), phi);
    std::vector<double> counts(30, 0.0);
    for (auto& l : lists)
      for (ItemIndex i : l) counts[i] += 1;
    CHECK(std::fabs(rep.correlation.r - static_cast<double>(oracle::pearson_r(counts, phi))) < 1e-12);
  }
}

TEST_CASE("group significance runs Welch on the defined values of each pair") {
  const auto groups = groups_from({UserGroup::Niche, UserGroup::Niche, UserGroup::Niche, UserGroup::Diverse,
                                   UserGroup::Diverse, UserGroup::Diverse, UserGroup::BestsellerFocused,
                                   UserGroup::BestsellerFocused, UserGroup::BestsellerFocused});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> v = {0.1, 0.2, 0.15, 0.5, 0.55, nan, 0.9, 0.95, 0.85};
  const auto rows = group_significance_test(v, groups);
  CHECK(rows[0].a == UserGroup::Niche);
  CHECK(rows[0].b == UserGroup::Diverse);
  CHECK(rows[2].a == UserGroup::Diverse);
  CHECK(rows[2].b == UserGroup::BestsellerFocused);
  const auto w = oracle::welch({0.1, 0.2, 0.15}, {0.5, 0.55});
  CHECK(rows[0].test.t == doctest::Approx(w.t).epsilon(1e-12));
  CHECK(rows[0].test.p == doctest::Approx(w.p).epsilon(1e-8));
  for (auto& r : rows) CHECK(r.significant == (r.test.p < 0.05));
}

TEST_CASE("tradeoff correlation on collinear points") {
  const std::vector<double> ndcg = {0.01, 0.02, 0.04}, dg = {10.0, 20.0, 40.0};
  const auto c = tradeoff_correlation(ndcg, dg);
  CHECK(c.r == doctest::Approx(1.0));
  CHECK(c.n == 3);
  const std::vector<double> two = {0.1, 0.2};
  CHECK_THROWS(tradeoff_correlation(two, two));
}

TEST_CASE("summaries") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(x);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.n == 4);
}

// ---------------------------------------------------------------- end to end on seeded toys

TEST_CASE("GAP and delta GAP against a direct recomputation on 100 seeded instances") {
  std::mt19937_64 gen(99);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t nu = 10 + gen() % 30, ni = 12 + gen() % 30;
    const auto rows = testing::random_interactions(nu, ni, 0.15, gen());
    const auto d = testing::make_dataset(nu, ni, rows);
    const auto pop = compute_item_popularity(d);
    const auto stats = user_profile_stats(d, pop);
    const auto groups = assign_groups(stats);
    std::vector<std::vector<ItemIndex>> profiles(nu), recs(nu);
    for (auto& x : rows) profiles[x.user].push_back(x.item);
    for (UserIndex u = 0; u < nu; ++u) {
      for (int k = 0; k < 3; ++k) recs[u].push_back(static_cast<ItemIndex>(gen() % ni));
    }
    const auto rep = gap_report(groups, profiles, recs, pop.phi);
    const auto readers = d.reader_counts();
    for (auto g : kAllGroups) {
      long double gp = 0, gr = 0;
      std::size_t members = 0;
      for (UserIndex u = 0; u < nu; ++u) {
        if (groups.label[u] != g) continue;
        ++members;
        long double s = 0;
        for (ItemIndex i : profiles[u]) s += readers[i];
        gp += s / nu / profiles[u].size();
        long double t = 0;
        for (ItemIndex i : recs[u]) t += readers[i];
        gr += t / nu / recs[u].size();
      }
      gp /= members;
      gr /= members;
      const auto& row = rep[static_cast<int>(g)];
      CHECK(std::fabs(row.gap_p - static_cast<double>(gp)) < 1e-12);
      CHECK(std::fabs(row.gap_r - static_cast<double>(gr)) < 1e-12);
      CHECK(std::fabs(row.delta.ratio - static_cast<double>((gr - gp) / gp)) < 1e-12);
    }
  }
}
