#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fairbook/error.hpp"
#include "fairbook/profiling.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fairbook;
using testing::make_dataset;

namespace {

// 4 users, 5 items. Reader counts: item0 3, item1 1, item2 2, item3 2, item4 1.
Dataset toy() {
  return make_dataset(4, 5,
                      {{0, 0, 5}, {0, 1, 6}, {0, 2, 7}, {1, 0, 3}, {1, 3, 8}, {2, 0, 9},
                       {2, 2, 4}, {3, 3, 2}, {3, 4, 10}});
}

UserProfileStats with_ratio(std::size_t popular, std::size_t size) {
  UserProfileStats s;
  s.profile_size = size;
  s.n_popular = popular;
  s.ratio_popular = static_cast<double>(popular) / static_cast<double>(size);
  return s;
}

}  // namespace

TEST_CASE("item popularity on a hand-counted toy") {
  const auto pop = compute_item_popularity(toy());
  CHECK(pop.reader_count == std::vector<std::size_t>{3, 1, 2, 2, 1});
  CHECK(pop.phi[0] == 0.75);
  CHECK(pop.phi[1] == 0.25);
  CHECK(pop.phi[2] == 0.5);
  CHECK(pop.n_popular == 1);
  CHECK(pop.is_popular == std::vector<bool>{true, false, false, false, false});
  // Ties broken by item index: 2 before 3, 1 before 4.
  CHECK(pop.rank_order == std::vector<ItemIndex>{0, 2, 3, 1, 4});
}

TEST_CASE("item read by every user has phi 1") {
  const auto pop = compute_item_popularity(make_dataset(3, 2, {{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {2, 1, 1}}));
  CHECK(pop.phi[0] == 1.0);
}

TEST_CASE("popular set size is floor(20%) with index tie-break") {
  // 11 items all read once: floor(2.2) = 2, the two lowest indices win.
  std::vector<Interaction> rows;
  for (ItemIndex i = 0; i < 11; ++i) rows.push_back({0, i, 5});
  const auto pop = compute_item_popularity(make_dataset(1, 11, rows));
  CHECK(pop.n_popular == 2);
  CHECK(pop.is_popular[0]);
  CHECK(pop.is_popular[1]);
  CHECK(std::count(pop.is_popular.begin(), pop.is_popular.end(), true) == 2);
  CHECK(static_cast<std::size_t>(std::floor(0.2 * 6921)) == 1384);
}

TEST_CASE("user profile statistics on the toy") {
  const auto d = toy();
  const auto pop = compute_item_popularity(d);
  const auto s = user_profile_stats(d, pop);
  // User 0 reads {0 (popular), 1, 2}.
  CHECK(s[0].profile_size == 3);
  CHECK(s[0].n_popular == 1);
  CHECK(s[0].ratio_popular == doctest::Approx(1.0 / 3.0));
  CHECK(s[0].avg_item_popularity == doctest::Approx((0.75 + 0.25 + 0.5) / 3.0));
  CHECK(s[3].n_popular == 0);
  CHECK(s[3].ratio_popular == 0.0);
}

TEST_CASE("all-popular profile has ratio 1") {
  // Five items, item 0 read by both users and flagged popular; user 1 reads only item 0.
  const auto d = make_dataset(2, 5, {{0, 0, 1}, {0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}, {1, 0, 1}});
  const auto s = user_profile_stats(d, compute_item_popularity(d));
  CHECK(s[1].ratio_popular == 1.0);
}

TEST_CASE("counting users at ratio <= 0.8 is exact on fractions") {
  std::vector<UserProfileStats> s = {with_ratio(4, 5), with_ratio(8, 10), with_ratio(9, 10), with_ratio(0, 5),
                                     with_ratio(5, 5)};
  CHECK(count_users_ratio_at_most(s, 0.8) == 3);
}

TEST_CASE("groups for ten users with ratios 0.0 .. 0.9") {
  std::vector<UserProfileStats> s;
  // Shuffled order so the sort does the work.
  for (std::size_t k : {5, 0, 9, 3, 1, 8, 2, 7, 4, 6}) s.push_back(with_ratio(k, 10));
  const auto g = assign_groups(s);
  CHECK(g.size(UserGroup::Niche) == 2);
  CHECK(g.size(UserGroup::BestsellerFocused) == 2);
  CHECK(g.size(UserGroup::Diverse) == 6);
  // Ratio 0.0 is user 1, 0.1 user 4; 0.8 user 5, 0.9 user 2.
  auto niche = g.users(UserGroup::Niche);
  auto best = g.users(UserGroup::BestsellerFocused);
  std::sort(niche.begin(), niche.end());
  std::sort(best.begin(), best.end());
  CHECK(niche == std::vector<UserIndex>{1, 4});
  CHECK(best == std::vector<UserIndex>{2, 5});
  CHECK(g.label[1] == UserGroup::Niche);
  CHECK(g.label[0] == UserGroup::Diverse);
}

TEST_CASE("identical ratios: assignment by user index") {
  std::vector<UserProfileStats> s(12, with_ratio(1, 2));
  const auto g = assign_groups(s);
  auto niche = g.users(UserGroup::Niche);
  auto best = g.users(UserGroup::BestsellerFocused);
  std::sort(niche.begin(), niche.end());
  std::sort(best.begin(), best.end());
  CHECK(niche == std::vector<UserIndex>{0, 1});
  CHECK(best == std::vector<UserIndex>{10, 11});
}

TEST_CASE("group sizes follow floor(20%) and partition the users") {
  std::mt19937_64 gen(3);
  for (std::size_t n : {5UL, 6UL, 9UL, 10UL, 101UL, 6358UL}) {
    std::vector<UserProfileStats> s;
    for (std::size_t u = 0; u < n; ++u) s.push_back(with_ratio(gen() % 11, 10));
    const auto g = assign_groups(s);
    const auto fifth = static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(n)));
    CHECK(g.size(UserGroup::Niche) == fifth);
    CHECK(g.size(UserGroup::BestsellerFocused) == fifth);
    CHECK(g.size(UserGroup::Diverse) == n - 2 * fifth);
    std::vector<int> seen(n, 0);
    for (auto grp : kAllGroups) {
      for (auto u : g.users(grp)) {
        ++seen[u];
        CHECK(g.label[u] == grp);
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    // Monotone boundaries.
    double max_niche = 0, min_div = 1, max_div = 0, min_best = 1;
    for (auto u : g.users(UserGroup::Niche)) max_niche = std::max(max_niche, s[u].ratio_popular);
    for (auto u : g.users(UserGroup::Diverse)) {
      min_div = std::min(min_div, s[u].ratio_popular);
      max_div = std::max(max_div, s[u].ratio_popular);
    }
    for (auto u : g.users(UserGroup::BestsellerFocused)) min_best = std::min(min_best, s[u].ratio_popular);
    CHECK(max_niche <= min_div);
    CHECK(max_div <= min_best);
    if (n == 6358) {
      CHECK(g.size(UserGroup::Niche) == 1271);
      CHECK(g.size(UserGroup::Diverse) == 3816);
    }
  }
  std::vector<UserProfileStats> four(4, with_ratio(1, 2));
  CHECK_THROWS_AS(assign_groups(four), ContractError);
}

TEST_CASE("group names round-trip") {
  for (auto g : kAllGroups) CHECK(parse_group(group_name(g)) == g);
  CHECK(group_name(UserGroup::BestsellerFocused) == "bestseller");
  CHECK_THROWS_AS(parse_group("mainstream"), ContractError);
}

TEST_CASE("profile correlations: signs on a planted toy match the oracle") {
  // Sizes 5, 10, 20: larger profiles hold more popular items but a lower
  // average popularity.
  std::vector<UserProfileStats> s;
  const std::size_t sizes[] = {5, 10, 20, 6, 12, 18};
  const std::size_t popular[] = {2, 3, 5, 2, 4, 4};
  const double avg[] = {0.30, 0.22, 0.15, 0.28, 0.20, 0.16};
  for (int k = 0; k < 6; ++k) {
    UserProfileStats u = with_ratio(popular[k], sizes[k]);
    u.avg_item_popularity = avg[k];
    s.push_back(u);
  }
  const auto [a, b] = profile_popularity_correlations(s);
  std::vector<double> x, y1, y2;
  for (const auto& u : s) {
    x.push_back(static_cast<double>(u.profile_size));
    y1.push_back(static_cast<double>(u.n_popular));
    y2.push_back(u.avg_item_popularity);
  }
  CHECK(a.r > 0);
  CHECK(b.r < 0);
  CHECK(std::fabs(a.r - static_cast<double>(oracle::pearson_r(x, y1))) < 1e-12);
  CHECK(std::fabs(b.r - static_cast<double>(oracle::pearson_r(x, y2))) < 1e-12);
}

TEST_CASE("profile correlations: equal profile sizes are undefined") {
  std::vector<UserProfileStats> s(6, with_ratio(2, 5));
  s[1].n_popular = 3;
  CHECK_THROWS_AS(profile_popularity_correlations(s), UndefinedCorrelation);
}

TEST_CASE("group profile summary on ten users") {
  std::vector<UserProfileStats> s;
  // ratio k/10 for user k, profile sizes chosen per user.
  const std::size_t size[] = {10, 20, 10, 30, 40, 10, 10, 10, 20, 30};
  for (std::size_t k = 0; k < 10; ++k) {
    auto u = with_ratio(k * size[k] / 10, size[k]);
    s.push_back(u);
  }
  const auto g = assign_groups(s);
  const auto sum = group_profile_summary(s, g);
  CHECK(sum.mean_profile_size[0] == doctest::Approx((10.0 + 20.0) / 2));
  CHECK(sum.mean_profile_size[2] == doctest::Approx((20.0 + 30.0) / 2));
  CHECK(sum.mean_profile_size[1] == doctest::Approx((10.0 + 30 + 40 + 10 + 10 + 10) / 6));
  CHECK(sum.users == std::array<std::size_t, 3>{2, 6, 2});

  std::vector<UserProfileStats> same(5, with_ratio(1, 7));
  const auto g2 = assign_groups(same);
  CHECK(group_profile_summary(same, g2).mean_profile_size[1] == 7.0);
}

TEST_CASE("long-tail series and ratio histogram") {
  const auto d = toy();
  const auto pop = compute_item_popularity(d);
  const auto series = longtail_series(pop);
  REQUIRE(series.size() == 5);
  CHECK(series[0] == std::pair<std::size_t, std::size_t>{1, 3});
  CHECK(series[4] == std::pair<std::size_t, std::size_t>{5, 1});

  std::vector<UserProfileStats> s = {with_ratio(0, 5), with_ratio(1, 10), with_ratio(3, 15), with_ratio(5, 5),
                                     with_ratio(9, 10), with_ratio(7, 10)};
  const auto h = ratio_histogram(s, 10);
  REQUIRE(h.size() == 10);
  CHECK(h[0].count == 1);  // 0.0
  CHECK(h[1].count == 1);  // 0.1 starts bin 1
  CHECK(h[2].count == 1);  // 0.2
  CHECK(h[7].count == 1);  // 0.7
  CHECK(h[9].count == 2);  // 0.9 and 1.0 (closed last bin)
  CHECK(h[9].high == 1.0);
}

TEST_CASE("popularity is invariant under raw id relabelling") {
  const auto base = toy();
  std::vector<std::string> users(base.user_ids().begin(), base.user_ids().end());
  std::vector<std::string> items;
  for (auto& id : base.item_ids()) items.push_back("renamed-" + id);
  const Dataset renamed({base.interactions().begin(), base.interactions().end()}, users, items);
  const auto a = compute_item_popularity(base);
  const auto b = compute_item_popularity(renamed);
  CHECK(a.phi == b.phi);
  CHECK(a.is_popular == b.is_popular);
  CHECK(a.rank_order == b.rank_order);
}

TEST_CASE("duplicating every item keeps each user's popular ratio") {
  // 10 items with distinct reader counts; a copy of each item doubles the catalogue.
  std::vector<Interaction> rows, doubled;
  const std::size_t n_users = 11;
  for (ItemIndex i = 0; i < 10; ++i) {
    for (UserIndex u = 0; u <= i + 1 && u < n_users; ++u) {
      rows.push_back({u, i, 5});
      doubled.push_back({u, i, 5});
      doubled.push_back({u, static_cast<ItemIndex>(i + 10), 5});
    }
  }
  const auto d1 = make_dataset(n_users, 10, rows);
  const auto d2 = make_dataset(n_users, 20, doubled);
  const auto s1 = user_profile_stats(d1, compute_item_popularity(d1));
  const auto s2 = user_profile_stats(d2, compute_item_popularity(d2));
  for (std::size_t u = 0; u < n_users; ++u) {
    CHECK(s2[u].profile_size == 2 * s1[u].profile_size);
    CHECK(s2[u].ratio_popular == doctest::Approx(s1[u].ratio_popular));
  }
  const auto g1 = assign_groups(s1), g2 = assign_groups(s2);
  CHECK(g1.label == g2.label);
}
