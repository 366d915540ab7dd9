#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fairbook {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

// One row of the Book-Crossing ratings file. Rating 0 marks an implicit
// interaction; 1..10 are explicit ratings.
struct RawRating {
  std::string user_id;
  std::string isbn;
  int rating = 0;

  bool operator==(const RawRating&) const = default;
};

struct ParseResult {
  std::vector<RawRating> rows;
  std::size_t data_lines = 0;  // every line after the header
  std::size_t malformed = 0;
};

// Parses the semicolon-separated, fully quoted ratings format
// (`"User-ID";"ISBN";"Book-Rating"`). Latin-1 bytes in ids are re-encoded as
// UTF-8. Malformed lines are skipped and counted; with `strict` set, more than
// 1% malformed lines is an IngestError.
ParseResult parse_ratings(std::istream& in, bool strict = false);
ParseResult parse_ratings_file(const std::filesystem::path& path, bool strict = false);

struct Interaction {
  UserIndex user = 0;
  ItemIndex item = 0;
  int rating = 0;

  bool operator==(const Interaction&) const = default;
};

// Immutable, densely indexed explicit-rating dataset.
class Dataset {
 public:
  Dataset() = default;

  // Validates density of indices, rating range and pair uniqueness.
  Dataset(std::vector<Interaction> interactions, std::vector<std::string> user_ids,
          std::vector<std::string> item_ids);

  std::size_t n_users() const { return user_ids_.size(); }
  std::size_t n_items() const { return item_ids_.size(); }
  std::span<const Interaction> interactions() const { return interactions_; }
  const std::string& user_id(UserIndex u) const { return user_ids_.at(u); }
  const std::string& item_id(ItemIndex i) const { return item_ids_.at(i); }
  std::span<const std::string> user_ids() const { return user_ids_; }
  std::span<const std::string> item_ids() const { return item_ids_; }

  std::vector<std::size_t> profile_sizes() const;
  std::vector<std::size_t> reader_counts() const;

  // Item lists per user, in interaction order.
  std::vector<std::vector<ItemIndex>> profiles() const;

 private:
  std::vector<Interaction> interactions_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
};

// Row counts removed at each preprocessing step.
struct Provenance {
  std::size_t data_lines = 0;
  std::size_t malformed = 0;
  std::size_t parsed = 0;
  std::size_t dropped_implicit = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_user_filter = 0;
  std::size_t dropped_item_filter = 0;
  std::size_t kept = 0;
  std::size_t users_dropped = 0;
  std::size_t items_dropped = 0;

  std::string report() const;
};

struct PreprocessResult {
  Dataset dataset;
  Provenance provenance;
};

inline constexpr std::size_t kMinRatings = 5;

// Implicit removal, last-wins dedupe, one pass of the user filter then one
// pass of the item filter, then dense indices by first appearance.
// An empty result is an IngestError carrying the step report.
PreprocessResult preprocess(std::span<const RawRating> raw, std::size_t min_ratings = kMinRatings);
PreprocessResult preprocess(const ParseResult& parsed, std::size_t min_ratings = kMinRatings);

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_interactions = 0;
  double interactions_per_user = 0.0;
  double interactions_per_item = 0.0;
  double sparsity = 0.0;  // fraction, 1 - density
};

DatasetStats dataset_stats(const Dataset& d);

// Canonical on-disk form: dataset.csv plus idmap_users.csv / idmap_items.csv.
void write_dataset(const Dataset& d, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

// Same CSV layout as dataset.csv, for train/test splits.
std::string interactions_csv(std::span<const Interaction> rows);
std::vector<Interaction> read_interactions(const std::filesystem::path& path);

}  // namespace fairbook
