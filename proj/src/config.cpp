#include "fairbook/config.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "fairbook/checksum.hpp"
#include "fairbook/csv.hpp"
#include "fairbook/error.hpp"

namespace fairbook {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Section {
  std::string kind;
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::size_t> entry_lines;
};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ContractError("config line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, std::size_t line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(line, "expected a number, got '" + v + "'");
  return out;
}

template <typename T>
T to_integer(const std::string& v, std::size_t line) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(line, "expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, std::size_t line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(line, "expected true/false, got '" + v + "'");
}

std::vector<Section> sections_of(std::string_view text) {
  std::vector<Section> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      std::string_view inner = trim(line.substr(1, line.size() - 2));
      Section s;
      s.line = line_no;
      const auto q = inner.find('"');
      if (q == std::string_view::npos) {
        s.kind = std::string(inner);
      } else {
        const auto q2 = inner.rfind('"');
        if (q2 == q) fail(line_no, "unterminated section name");
        s.kind = std::string(trim(inner.substr(0, q)));
        s.name = std::string(inner.substr(q + 1, q2 - q - 1));
        if (s.name.empty()) fail(line_no, "empty section name");
      }
      out.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    if (out.empty()) fail(line_no, "key outside of any section");
    out.back().entries.emplace_back(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    out.back().entry_lines.push_back(line_no);
  }
  return out;
}

bool valid_file_name(const std::string& name) {
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.source = std::string(text);
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  cfg.output = resolve("out");

  std::vector<std::string> names;
  for (const auto& s : sections_of(text)) {
    if (s.kind == "model" || s.kind == "external") {
      if (s.name.empty()) fail(s.line, s.kind + " section needs a quoted name");
      if (!valid_file_name(s.name)) fail(s.line, "name '" + s.name + "' must be [A-Za-z0-9_.-]");
      if (std::find(names.begin(), names.end(), s.name) != names.end()) {
        fail(s.line, "duplicate model name '" + s.name + "'");
      }
      names.push_back(s.name);
    }

    if (s.kind == "model") {
      std::string algo = s.name;
      for (const auto& [k, v] : s.entries) {
        if (k == "algorithm") algo = v;
      }
      ModelEntry m;
      m.name = s.name;
      try {
        m.config = ModelConfig::defaults(parse_algorithm(algo));
      } catch (const ContractError& e) {
        fail(s.line, e.what());
      }
      m.config.seed = cfg.seed;
      for (std::size_t k = 0; k < s.entries.size(); ++k) {
        const auto& [key, v] = s.entries[k];
        const auto ln = s.entry_lines[k];
        if (key == "algorithm") continue;
        else if (key == "k") m.config.k = to_integer<int>(v, ln);
        else if (key == "learning_rate") m.config.learning_rate = to_double(v, ln);
        else if (key == "regularization") m.config.regularization = to_double(v, ln);
        else if (key == "epochs") m.config.epochs = to_integer<int>(v, ln);
        else if (key == "neighbors") m.config.neighbors = to_integer<int>(v, ln);
        else if (key == "alpha") m.config.alpha = to_double(v, ln);
        else if (key == "prior_shape") m.config.prior_shape = to_double(v, ln);
        else if (key == "prior_rate") m.config.prior_rate = to_double(v, ln);
        else if (key == "seed") {
          m.config.seed = to_integer<std::uint64_t>(v, ln);
          m.explicit_seed = true;
        } else {
          fail(ln, "unknown model key '" + key + "'");
        }
      }
      try {
        m.config.validate();
      } catch (const ContractError& e) {
        fail(s.line, e.what());
      }
      cfg.models.push_back(std::move(m));
      continue;
    }

    for (std::size_t k = 0; k < s.entries.size(); ++k) {
      const auto& [key, v] = s.entries[k];
      const auto ln = s.entry_lines[k];
      if (s.kind == "data") {
        if (key == "ratings") cfg.ratings = resolve(v);
        else if (key == "output") cfg.output = resolve(v);
        else if (key == "strict") cfg.strict = to_bool(v, ln);
        else fail(ln, "unknown data key '" + key + "'");
      } else if (s.kind == "split") {
        if (key == "ratio") cfg.split_ratio = to_double(v, ln);
        else if (key == "seed") cfg.seed = to_integer<std::uint64_t>(v, ln);
        else if (key == "mode") {
          try {
            cfg.split_mode = parse_split_mode(v);
          } catch (const ContractError& e) {
            fail(ln, e.what());
          }
        } else fail(ln, "unknown split key '" + key + "'");
      } else if (s.kind == "evaluation") {
        if (key == "n") cfg.n = to_integer<std::size_t>(v, ln);
        else fail(ln, "unknown evaluation key '" + key + "'");
      } else if (s.kind == "external") {
        if (key == "path") cfg.externals.push_back({s.name, resolve(v)});
        else fail(ln, "unknown external key '" + key + "'");
      } else {
        fail(s.line, "unknown section '" + s.kind + "'");
      }
    }
    if (s.kind == "external" &&
        std::none_of(cfg.externals.begin(), cfg.externals.end(), [&](const auto& e) { return e.name == s.name; })) {
      fail(s.line, "external section needs a path");
    }
  }

  // Model sections may precede [split]; give them the final run seed.
  for (auto& m : cfg.models) {
    if (!m.explicit_seed) m.config.seed = cfg.seed;
  }
  if (cfg.models.empty()) {
    for (auto a : kAllAlgorithms) {
      ModelEntry m;
      m.name = std::string(algorithm_name(a));
      m.config = ModelConfig::defaults(a);
      m.config.seed = cfg.seed;
      cfg.models.push_back(std::move(m));
    }
  }
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) throw ContractError("config: split ratio must be in (0, 1)");
  if (cfg.n == 0) throw ContractError("config: evaluation n must be >= 1");
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IngestError("config file not found: " + path.string());
  return parse(csv::read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

void RunConfig::override_seed(std::uint64_t s) {
  seed = s;
  seed_override = s;
  for (auto& m : models) {
    if (!m.explicit_seed) m.config.seed = s;
  }
}

std::string RunConfig::hash() const {
  std::string key = source;
  if (seed_override) key += "\nseed_override=" + std::to_string(*seed_override);
  return checksum_hex(key);
}

}  // namespace fairbook
