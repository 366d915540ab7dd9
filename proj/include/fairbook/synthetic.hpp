#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace fairbook {

// Parameters of a generated ratings file in the Book-Crossing raw format.
// The defaults produce, after preprocessing, a corpus of roughly the size and
// sparsity of the real file's filtered form: a long-tailed item distribution,
// users whose taste ranges from tail-only to bestseller-only, genre structure
// for the learned models to find, implicit rows, duplicates and a few broken lines.
struct SyntheticSpec {
  std::size_t n_users = 7900;
  std::size_t n_items = 16000;
  std::size_t n_genres = 24;
  // Draw weight of an item is (rank + head_offset)^-e, where e runs from
  // tail_exponent for the most tail-loving users to popularity_exponent for
  // the most mainstream ones.
  double popularity_exponent = 1.3;
  double head_offset = 60.0;
  double tail_exponent = 0.25;
  std::size_t steepness_levels = 16;
  double genre_share = 0.35;          // draws restricted to a favourite genre
  double median_profile = 11.0;       // explicit ratings per user before filtering
  double mainstream_power = 0.6;      // user steepness position is U^power
  double implicit_share = 0.6;
  double duplicate_rate = 0.01;
  double malformed_rate = 0.0005;
  std::uint64_t seed = 20220410;
};

// Whole file content, header included, Latin-1 encoded.
std::string generate_bx_ratings(const SyntheticSpec& spec);

}  // namespace fairbook
