#include "aprobe/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace aprobe {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError("config: " + key + " expects on/off, got '" + v + "'");
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));

    if (key == "archives") {
      c.archives = split_list(value);
    } else if (key == "pca_threshold") {
      c.pca_threshold = to_double(key, value);
      if (!(c.pca_threshold > 0.0 && c.pca_threshold <= 1.0)) throw ConfigError("config: pca_threshold must be in (0, 1]");
    } else if (key == "C_grid" || key == "c_grid") {
      c.C_grid.clear();
      for (const auto& v : split_list(value)) {
        const double C = to_double(key, v);
        if (!(C > 0.0)) throw ConfigError("config: C values must be positive");
        c.C_grid.push_back(C);
      }
      if (c.C_grid.empty()) throw ConfigError("config: C_grid is empty");
    } else if (key == "k_outer") {
      c.k_outer = to_uint(key, value);
      if (c.k_outer < 2) throw ConfigError("config: k_outer must be >= 2");
    } else if (key == "k_inner") {
      c.k_inner = to_uint(key, value);
      if (c.k_inner < 2) throw ConfigError("config: k_inner must be >= 2");
    } else if (key == "seed") {
      c.seed = to_uint(key, value);
    } else if (key == "positions") {
      c.positions.clear();
      for (const auto& v : split_list(value)) c.positions.push_back(static_cast<int>(to_uint(key, v)));
    } else if (key == "layer_policy") {
      if (value == "optimal_by_pos0") {
        c.layer_policy = LayerPolicy::optimal_by_pos0;
      } else if (value == "sweep_all") {
        c.layer_policy = LayerPolicy::sweep_all;
      } else if (value.rfind("fixed", 0) == 0) {
        // fixed(7) or fixed:7
        std::string digits;
        for (char ch : value.substr(5))
          if (ch != '(' && ch != ')' && ch != ':') digits.push_back(ch);
        c.layer_policy = LayerPolicy::fixed;
        c.fixed_layer = to_uint(key, trim(digits));
      } else {
        throw ConfigError("config: unknown layer_policy '" + value + "'");
      }
    } else if (key == "baselines") {
      c.baselines = to_bool(key, value);
    } else if (key == "ablations") {
      c.ablations = split_list(value);
    } else if (key == "workers") {
      c.workers = static_cast<int>(to_uint(key, value));
      if (c.workers < 1) throw ConfigError("config: workers must be >= 1");
    } else if (key == "confidence_mode") {
      try {
        c.confidence_mode = parse_confidence_mode(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    } else if (key == "whiten") {
      c.whiten = to_bool(key, value);
    } else if (key == "inner_pca_refit") {
      c.inner_pca_refit = to_bool(key, value);
    } else if (key == "checkpoint_dir") {
      c.checkpoint_dir = value;
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_string(LayerPolicy policy, std::size_t fixed_layer) {
  switch (policy) {
    case LayerPolicy::optimal_by_pos0: return "optimal_by_pos0";
    case LayerPolicy::sweep_all: return "sweep_all";
    case LayerPolicy::fixed: return "fixed(" + std::to_string(fixed_layer) + ")";
  }
  return "optimal_by_pos0";
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["pca_threshold"] = c.pca_threshold;
  j["C_grid"] = c.C_grid;
  j["k_outer"] = c.k_outer;
  j["k_inner"] = c.k_inner;
  j["seed"] = c.seed;
  j["positions"] = c.positions;
  j["layer_policy"] = to_string(c.layer_policy, c.fixed_layer);
  j["baselines"] = c.baselines;
  j["confidence_mode"] = to_string(c.confidence_mode);
  j["whiten"] = c.whiten;
  j["inner_pca_refit"] = c.inner_pca_refit;
  return j;
}

NestedCvOptions nested_cv_options(const RunConfig& c) {
  NestedCvOptions o;
  o.C_grid = c.C_grid;
  o.pca_threshold = c.pca_threshold;
  o.whiten = c.whiten;
  o.inner_k = c.k_inner;
  o.inner_pca_refit = c.inner_pca_refit;
  o.seed = c.seed;
  return o;
}

}  // namespace aprobe
