#include "fairbook/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "fairbook/error.hpp"
#include "fairbook/random.hpp"

namespace fairbook {
namespace {

struct Sampler {
  std::vector<std::uint32_t> items;
  std::vector<double> cdf;

  std::uint32_t draw(Rng& rng) const {
    const double x = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    return items[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), items.size() - 1)];
  }
};

Sampler make_sampler(std::vector<std::uint32_t> items, const std::vector<double>& weight) {
  Sampler s;
  s.items = std::move(items);
  s.cdf.reserve(s.items.size());
  double acc = 0.0;
  for (auto i : s.items) s.cdf.push_back(acc += weight[i]);
  return s;
}

std::string isbn_for(std::size_t i) {
  char buf[16];
  const unsigned long long body = (static_cast<unsigned long long>(i) * 7919ULL + 12345ULL) % 1000000000ULL;
  const char check = (i % 11 == 10) ? 'X' : static_cast<char>('0' + i % 11 % 10);
  std::snprintf(buf, sizeof buf, "%09llu%c", body, check);
  std::string s = buf;
  if (i % 997 == 5) s.push_back(static_cast<char>(0xE9));  // stray Latin-1 byte
  return s;
}

std::string quoted_row(const std::string& user, const std::string& isbn, int rating) {
  return "\"" + user + "\";\"" + isbn + "\";\"" + std::to_string(rating) + "\"\n";
}

}  // namespace

std::string generate_bx_ratings(const SyntheticSpec& spec) {
  if (spec.n_users == 0 || spec.n_items == 0 || spec.n_genres == 0) {
    throw ContractError("generate_bx_ratings: sizes must be positive");
  }
  Rng rng(spec.seed);
  const std::size_t n_items = spec.n_items;

  // Popularity rank of each item is a random permutation.
  std::vector<std::uint32_t> rank(n_items);
  std::iota(rank.begin(), rank.end(), 0U);
  rng.shuffle(std::span<std::uint32_t>(rank));
  std::vector<std::size_t> genre(n_items);
  std::vector<double> quality(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    genre[i] = rng.below(spec.n_genres);
    quality[i] = 0.8 * rng.normal();
  }
  // One global and one per-genre sampler for each steepness level, from the
  // flat tail exponent up to the full popularity exponent.
  const std::size_t levels = std::max<std::size_t>(spec.steepness_levels, 2);
  std::vector<Sampler> global(levels);
  std::vector<std::vector<Sampler>> by_genre(levels);
  std::vector<std::vector<std::uint32_t>> members(spec.n_genres);
  for (std::size_t i = 0; i < n_items; ++i) members[genre[i]].push_back(static_cast<std::uint32_t>(i));
  for (std::size_t g = 0; g < spec.n_genres; ++g) {
    if (members[g].empty()) members[g].push_back(static_cast<std::uint32_t>(g % n_items));
  }
  std::vector<std::uint32_t> all(n_items);
  std::iota(all.begin(), all.end(), 0U);
  for (std::size_t l = 0; l < levels; ++l) {
    const double e = spec.tail_exponent +
                     (spec.popularity_exponent - spec.tail_exponent) * static_cast<double>(l) / static_cast<double>(levels - 1);
    std::vector<double> w(n_items);
    for (std::size_t i = 0; i < n_items; ++i) w[i] = std::pow(rank[i] + spec.head_offset, -e);
    global[l] = make_sampler(all, w);
    for (std::size_t g = 0; g < spec.n_genres; ++g) by_genre[l].push_back(make_sampler(members[g], w));
  }

  std::vector<std::size_t> user_order(spec.n_users);
  std::iota(user_order.begin(), user_order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(user_order));

  std::string out = "\"User-ID\";\"ISBN\";\"Book-Rating\"\n";
  const double log_median = std::log(spec.median_profile);
  for (std::size_t u : user_order) {
    const std::string uid = std::to_string(u * 13 + 8);
    // Steepness of the user's draws over the popularity curve.
    const double mainstreamness = std::pow(rng.uniform(), spec.mainstream_power);
    const auto level = std::min(levels - 1, static_cast<std::size_t>(mainstreamness * static_cast<double>(levels)));
    const std::size_t fav_a = rng.below(spec.n_genres), fav_b = rng.below(spec.n_genres);
    const double shape = 0.55 * std::sin(3.14159265358979 * mainstreamness) - 0.75 * mainstreamness;
    const double size_draw = std::exp(log_median + shape + 0.85 * rng.normal());
    const auto target = std::min<std::size_t>(static_cast<std::size_t>(std::lround(size_draw)), n_items / 4);
    const double bias = 0.9 * rng.normal();

    struct Row {
      std::uint32_t item;
      int rating;
    };
    std::vector<Row> rows;
    std::unordered_set<std::uint32_t> taken;
    for (std::size_t attempt = 0; rows.size() < target && attempt < 20 * target + 20; ++attempt) {
      const std::uint32_t i = rng.uniform() < spec.genre_share
                                  ? by_genre[level][rng.uniform() < 0.5 ? fav_a : fav_b].draw(rng)
                                  : global[level].draw(rng);
      if (!taken.insert(i).second) continue;
      const double match = (genre[i] == fav_a || genre[i] == fav_b) ? 0.8 : 0.0;
      const double raw = 7.3 + bias + quality[i] + match + 1.2 * rng.normal();
      rows.push_back({i, static_cast<int>(std::clamp(std::lround(raw), 1L, 10L))});
    }
    const auto implicit = static_cast<std::size_t>(
        std::lround(static_cast<double>(rows.size()) * spec.implicit_share / (1.0 - spec.implicit_share)));
    for (std::size_t k = 0; k < implicit; ++k) {
      const std::uint32_t i = global[levels - 1].draw(rng);
      if (taken.insert(i).second) rows.push_back({i, 0});
    }
    rng.shuffle(std::span<Row>(rows));

    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rng.uniform() < spec.malformed_rate) {
        out += "\"" + uid + "\";\"" + isbn_for(rows[k].item) + "\";\"n/a\"\n";
      }
      out += quoted_row(uid, isbn_for(rows[k].item), rows[k].rating);
      if (rows[k].rating > 0 && rng.uniform() < spec.duplicate_rate) {
        // Re-rating of an earlier book; the later row is the one kept.
        const auto& again = rows[rng.below(k + 1)];
        const int r = again.rating > 0 ? std::clamp(again.rating + (rng.uniform() < 0.5 ? -1 : 1), 1, 10) : 0;
        out += quoted_row(uid, isbn_for(again.item), r);
      }
    }
  }
  return out;
}

}  // namespace fairbook
