#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aprobe/baselines.hpp"
#include "aprobe/canonical.hpp"
#include "aprobe/nested_cv.hpp"

namespace aprobe {

enum class LayerPolicy { optimal_by_pos0, sweep_all, fixed };

struct RunConfig {
  std::vector<std::string> archives;
  double pca_threshold = 0.95;
  std::vector<double> C_grid = kDefaultCGrid;
  std::size_t k_outer = 5;
  std::size_t k_inner = 3;
  std::uint64_t seed = 0;
  std::vector<int> positions;  // empty = every position in the archive
  LayerPolicy layer_policy = LayerPolicy::optimal_by_pos0;
  std::size_t fixed_layer = 0;
  bool baselines = true;
  std::vector<std::string> ablations;
  int workers = 1;
  ConfidenceMode confidence_mode = ConfidenceMode::geometric_mean;
  bool whiten = false;
  bool inner_pca_refit = true;
  std::string checkpoint_dir;  // empty = no checkpointing
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lines of `key = value`; '#' starts a comment; lists are comma separated.
// Unknown keys and malformed values raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

std::string to_string(LayerPolicy policy, std::size_t fixed_layer = 0);

// Settings that influence results. Worker count and checkpoint location are
// excluded: they never change an output byte.
Json config_to_json(const RunConfig& config);

NestedCvOptions nested_cv_options(const RunConfig& config);

}  // namespace aprobe
