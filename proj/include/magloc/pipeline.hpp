#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magloc/aperture.hpp"
#include "magloc/config.hpp"
#include "magloc/gridsearch.hpp"
#include "magloc/imaging.hpp"

namespace magloc {

struct LocateResult {
  ProjectionData projections;
  IndicatorGrid grid;
  std::vector<Peak> peaks;
  std::vector<RefinedPeak> refined;
  std::optional<FitReport> fit;  // present when the extension ran
};

/// Synthesizes clean data for the configured scenario and applies the noise
/// model (beta = 0 leaves it untouched).
Measurement run_synth(const RunConfig& config);

/// Applies the configured aperture. Full aperture returns the input.
Measurement apply_aperture(const Measurement& meas, const RunConfig& config);

/// Fits the extension on partial data and evaluates it on the full rule.
Measurement run_extend(const Measurement& partial, const RunConfig& config, FitReport* report);

/// Full imaging pass on a weighted measurement (or raw-partial measurement
/// with re-attached weights): projections, sweep, peaks, refinement.
LocateResult run_locate(const Measurement& meas, const RunConfig& config);

/// synth -> corrupt -> [restrict -> extend | restrict -> raw] -> locate.
LocateResult run_pipeline(const RunConfig& config);

/// Best refined position (argmax peak), the per-run point estimate.
Vec3 best_position(const LocateResult& result);

}  // namespace magloc
