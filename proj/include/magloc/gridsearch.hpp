#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "magloc/imaging.hpp"
#include "magloc/types.hpp"

namespace magloc {

/// Plane for 2D sweeps: points of the shell lattice restricted to it.
struct SliceSpec {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3(0, 0, 1);
};

/// Cartesian lattice of spacing h masked to inner <= |z| <= outer,
/// optionally restricted to a slice plane.  Lattice indices are kept so
/// neighborhoods can be resolved without spatial search.
struct ShellGrid {
  double inner_radius = 0.5;
  double outer_radius = 1.0;
  double spacing = 0.02;
  std::optional<SliceSpec> slice;
  std::vector<Vec3> points;
  std::vector<std::array<int, 3>> indices;  // (i, j, 0) in slice mode

  std::size_t size() const { return points.size(); }
};

ShellGrid build_shell_grid(double inner, double outer, double h,
                           std::optional<SliceSpec> slice = std::nullopt);

/// Raw and normalized indicator values over a grid (Algorithm step 7:
/// normalized = raw / max raw, so the maximum is exactly 1).
struct IndicatorGrid {
  ShellGrid grid;
  std::vector<double> values;
  std::vector<double> normalized;
  std::vector<bool> saturated;
  std::size_t argmax = 0;
};

IndicatorGrid sweep(const ShellGrid& grid, const ProjectionData& pd, const TransferEvaluator& te,
                    int threads = 0);

struct Peak {
  Vec3 position = Vec3::Zero();
  double normalized_value = 0.0;
  double support_radius = 0.0;  // distance to the nearest strictly higher grid value
  bool saturated = false;
};

/// Local maxima of the normalized field over the 26-neighborhood
/// (8-neighborhood on slices) with value >= threshold, greedily deduplicated
/// within min_separation keeping the higher value.
std::vector<Peak> extract_peaks(const IndicatorGrid& ig, double threshold, double min_separation);

struct RefinedPeak {
  Vec3 position = Vec3::Zero();
  double value = 0.0;
  bool clamped = false;  // refinement window was cut by the shell boundary
};

/// Re-sweeps a 3x finer lattice over the peak's cell neighborhood.
RefinedPeak refine_peak(const IndicatorGrid& ig, const Peak& peak, const ProjectionData& pd,
                        const TransferEvaluator& te);

/// Grid CSV: x,y,z,I_raw,I_norm,saturated with a '#' sidecar header
/// (slice plane recorded when present).
void write_indicator_csv(const IndicatorGrid& ig, const std::string& path);

}  // namespace magloc
