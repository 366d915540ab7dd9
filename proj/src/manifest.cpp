#include "fairbook/manifest.hpp"

#include "fairbook/csv.hpp"
#include "fairbook/error.hpp"

namespace fairbook {

Manifest Manifest::load(const std::filesystem::path& path) {
  Manifest m;
  if (!std::filesystem::exists(path)) return m;
  const std::string text = csv::read_file(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IngestError("malformed manifest line: " + line);
    m.entries_[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const { csv::write_atomic(path, text()); }

void Manifest::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of(" =\n") != std::string::npos || value.find('\n') != std::string::npos) {
    throw ContractError("invalid manifest entry '" + key + "'");
  }
  entries_[key] = value;
}

std::optional<std::string> Manifest::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Manifest::erase_prefix(const std::string& prefix) {
  auto it = entries_.lower_bound(prefix);
  while (it != entries_.end() && it->first.compare(0, prefix.size(), prefix) == 0) it = entries_.erase(it);
}

std::string Manifest::text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> decision_switches() {
  return {
      {"decision.filter_order", "implicit,dedupe,user>=5,item>=5 (single pass)"},
      {"decision.duplicate_rule", "keep_last"},
      {"decision.popular_items", "top floor(20%) by reader count, index breaks ties"},
      {"decision.user_groups", "ratio ascending, floor(20%) niche, floor(20%) bestseller"},
      {"decision.significance_test", "welch_two_sample_two_tailed"},
      {"decision.relevance", "any_test_interaction"},
      {"decision.gap_p_profile", "full_profile"},
      {"decision.userknn_similarity", "mean_centered_cosine"},
      {"decision.wmf_confidence", "1+alpha*r"},
      {"decision.bpr_negatives", "uniform_unobserved"},
      {"decision.mae_ranking_models", "min_max_over_test_pairs"},
      {"decision.cold_users", "mostpop_fallback"},
      {"decision.float_format", "%.6g"},
  };
}

}  // namespace fairbook
