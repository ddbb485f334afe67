#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "magloc/measurement.hpp"
#include "magloc/sphharm.hpp"
#include "magloc/types.hpp"

namespace magloc {

/// Small magnetized inclusion: position, size scale, polarization matrix.
/// The polarization couples the background field at the position to the
/// induced dipole moment; its internal structure is opaque to the imaging
/// side, so a user-supplied 3x3 (default identity) stands in for the
/// layer-potential expression.
struct Anomaly {
  Vec3 position = Vec3(0.75, 0.0, 0.0);
  double delta = 0.02;
  CMat3 polarization = CMat3::Identity();
};

enum class BackgroundKind { Uniform, AxialDipole, CustomCoefficients };

/// Background field H0.  Uniform: constant (complex) moment vector.
/// AxialDipole / CustomCoefficients: point dipole at the origin,
/// (3 xhat (xhat.m) - m) / (4 pi |x|^3); CustomCoefficients permits a fully
/// complex moment.
struct BackgroundSpec {
  BackgroundKind kind = BackgroundKind::AxialDipole;
  CVec3 moment = CVec3(0.0, 0.0, 1.0);
};

/// Ground truth: anomalies inside the shell plus the background generator.
struct Scenario {
  std::vector<Anomaly> anomalies;
  BackgroundSpec background;
  double R0 = 7.0;
  double earth_radius = 1.0;
  double core_radius = 0.5;
  bool allow_surface_touching = false;  // Example-1(b)-style placements

  void validate() const;  // throws ConfigError on violated invariants
  std::vector<std::string> warnings() const;
};

/// Hess Gamma_0(r) = (I - 3 rhat rhat^T) / (4 pi |r|^3); symmetric, trace-free.
Mat3 hessian_gamma0(const Vec3& r);

/// grad Gamma_0(r) = r / (4 pi |r|^3).
Vec3 gradient_gamma0(const Vec3& r);

CVec3 background_field(const BackgroundSpec& spec, const Vec3& x, double core_radius = 0.0);

/// Leading-order dipole data on the rule nodes:
///   values[k] = sum_l delta_l^3 HessGamma0(R0 d_k - z_l) (P_l H0(z_l)).
Measurement synthesize(const Scenario& scenario, const QuadratureRule& rule);

/// Per-component noise draws (default) or one draw shared by the three
/// Cartesian components of a sample.
enum class NoiseMode { PerComponent, PerSample };

/// H^beta = H + beta zeta1 max|H| exp(i 2 pi zeta2), zeta uniform on [-1,1],
/// deterministic in (seed, sample index, component).
Measurement corrupt(const Measurement& meas, double beta, std::uint64_t seed,
                    NoiseMode mode = NoiseMode::PerComponent);

struct ApertureSpec {
  enum class Kind { Full, Cap, Hemisphere, Quarter } kind = Kind::Full;
  Vec3 axis = Vec3(1, 0, 0);
  Vec3 axis2 = Vec3(0, 1, 0);  // quarter only
  double half_angle = kPi;     // cap only

  bool contains(const Vec3& d) const;  // boundary ties (|dot| < 1e-12) included
};

/// Keeps samples inside the aperture; weights are dropped (partial data is
/// not a quadrature).  Throws EmptyApertureError if nothing remains.
Measurement restrict_measurement(const Measurement& meas, const ApertureSpec& cap);

/// Re-attaches the original rule weights to a restricted measurement whose
/// directions are a subset of the rule nodes: the opt-in discretization of
/// integrals over the covered aperture only.
Measurement reattach_weights(const Measurement& partial, const QuadratureRule& rule);

}  // namespace magloc
