#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magloc/aperture.hpp"
#include "magloc/forward.hpp"
#include "magloc/gridsearch.hpp"
#include "magloc/types.hpp"

namespace magloc {

/// Everything a pipeline run needs, loadable from the key-value config
/// format documented in the README (sections in brackets, `key = value`
/// lines, repeated [anomaly] sections append; unknown keys are rejected).
struct RunConfig {
  Scenario scenario;
  int quadrature_degree = 16;
  double beta = 0.0;
  std::uint64_t seed = 1;
  NoiseMode noise_mode = NoiseMode::PerComponent;
  ApertureSpec aperture;
  bool aperture_raw = false;  // raw partial integration instead of extension
  VshBasisSpec basis;
  double fit_floor = 1e-10;
  bool fit_area_weighted = false;
  double grid_h = 0.02;
  double grid_inner = 0.5;
  double grid_outer = 1.0;
  std::optional<SliceSpec> slice;
  double peak_threshold = 0.5;
  double peak_min_separation = 0.05;
  std::string output_dir = "out";

  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Bundled scenario presets mirroring the experiments: ex1a, ex1b, ex2a,
/// ex2b, ex2b-close, ex3, ex4-full, ex4-hemi, ex4-quarter.
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
RunConfig preset_config(const std::string& name);

}  // namespace magloc
