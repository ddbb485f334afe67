#pragma once

#include <string>
#include <vector>

#include "magloc/measurement.hpp"
#include "magloc/sphharm.hpp"
#include "magloc/types.hpp"

namespace magloc {

/// Truncation degrees for the three vectorial-harmonic families used by the
/// data extension: I up to N1, T up to N2, N up to N3.
struct VshBasisSpec {
  int N1 = 2;
  int N2 = 0;
  int N3 = 6;

  struct Entry {
    VshKind kind;
    int n;
    int m;
  };

  /// Index ranges: I: n in [0,N1], |m| <= n+1;  T: n in [1,N2], |m| <= n;
  /// N: n in [1,N3], |m| <= n-1.
  std::vector<Entry> enumerate() const;
  int count() const;
};

struct VshCoefficients {
  VshBasisSpec basis;
  CVecX values;  // aligned with basis.enumerate()
};

struct FitReport {
  double residual_norm = 0.0;      // ||A c - b||
  double relative_residual = 0.0;  // residual / ||b||
  double condition_indicator = 0.0;  // sigma_max / sigma_min of the design
  int truncated_count = 0;           // singular values dropped by the floor
};

/// Minimum-norm least-squares solve with singular values below
/// floor * sigma_max truncated.  Throws DegenerateSystemError when every
/// singular value falls below the floor.
CVecX regularized_solve(const CMatX& design, const CVecX& rhs, double floor);

/// Fits the basis expansion to the partial-sphere samples in the discrete
/// per-node least-squares sense (optionally area-weighted when the partial
/// measurement carries weights), returning coefficients plus a fit report.
VshCoefficients fit_extension(const Measurement& partial, const VshBasisSpec& basis,
                              double floor = 1e-10, bool area_weighted = false,
                              FitReport* report = nullptr);

/// Evaluates the expansion on the full rule, producing a weighted Measurement.
Measurement evaluate_extension(const VshCoefficients& coeffs, const QuadratureRule& rule,
                               double R0);

/// Coefficient CSV: columns family,n,m,re,im with a '#' sidecar header.
void write_coefficients_csv(const VshCoefficients& coeffs, const std::string& path);
VshCoefficients read_coefficients_csv(const std::string& path);

}  // namespace magloc
