#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magloc/types.hpp"

namespace magloc {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  int quad_degree = 16;
  std::uint64_t seed = 7;
  /// Debug override of the Q_z projection scale (0 keeps the library value).
  /// Setting it to 1.0 is the negative control: the data/model consistency
  /// checks must then fail.
  double qz_scale_override = 0.0;
};

/// Runs the full numerical invariant suite: quadrature exactness,
/// orthonormality, tangency, N/D matrix identities, the rank property,
/// projection-constant calibration against synthetic dipole data, the
/// indicator bound, and the gradient-field (no T-content) property.
std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

}  // namespace magloc
