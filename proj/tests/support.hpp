#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "fairbook/dataset.hpp"
#include "fairbook/rating_matrix.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fairbook_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string bx_header() { return "\"User-ID\";\"ISBN\";\"Book-Rating\"\n"; }

inline std::string bx_line(const std::string& user, const std::string& isbn, int rating) {
  return "\"" + user + "\";\"" + isbn + "\";\"" + std::to_string(rating) + "\"\n";
}

// Dataset from (user, item, rating) triples with ids "u<k>" / "i<k>".
inline fairbook::Dataset make_dataset(std::size_t n_users, std::size_t n_items,
                                      const std::vector<fairbook::Interaction>& rows) {
  std::vector<std::string> users, items;
  for (std::size_t u = 0; u < n_users; ++u) users.push_back("u" + std::to_string(u));
  for (std::size_t i = 0; i < n_items; ++i) items.push_back("i" + std::to_string(i));
  return fairbook::Dataset(rows, users, items);
}

// Random explicit ratings where every user and item has at least one entry.
inline std::vector<fairbook::Interaction> random_interactions(std::size_t n_users, std::size_t n_items,
                                                              double density, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> rating(1, 10);
  std::vector<std::vector<bool>> has(n_users, std::vector<bool>(n_items, false));
  std::vector<fairbook::Interaction> rows;
  auto add = [&](std::size_t u, std::size_t i) {
    if (has[u][i]) return;
    has[u][i] = true;
    rows.push_back({static_cast<fairbook::UserIndex>(u), static_cast<fairbook::ItemIndex>(i), rating(gen)});
  };
  for (std::size_t u = 0; u < n_users; ++u) add(u, u % n_items);
  for (std::size_t i = 0; i < n_items; ++i) add(i % n_users, i);
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::size_t i = 0; i < n_items; ++i) {
      if (coin(gen) < density) add(u, i);
    }
  }
  return rows;
}

}  // namespace testing
