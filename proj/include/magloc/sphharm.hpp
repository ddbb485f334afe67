#pragma once

#include <span>
#include <vector>

#include "magloc/types.hpp"

namespace magloc {

/// Degree/order pair for a scalar spherical harmonic Y_n^m.
struct ShIndex {
  int n = 0;
  int m = 0;
};

/// The three vectorial spherical harmonic families.
/// I_n^m = grad_S Y_{n+1}^m + (n+1) Y_{n+1}^m x,   n >= 0, |m| <= n+1
/// T_n^m = grad_S Y_n^m x x,                       n >= 1, |m| <= n
/// N_n^m = -grad_S Y_{n-1}^m + n Y_{n-1}^m x,      n >= 1, |m| <= n-1
enum class VshKind { I, T, N };

/// Unit direction on S^2. Normalizes on construction; rejects near-zero input.
class UnitDirection {
 public:
  UnitDirection() : d_(0, 0, 1) {}
  explicit UnitDirection(const Vec3& v);
  const Vec3& vec() const { return d_; }
  double x() const { return d_.x(); }
  double y() const { return d_.y(); }
  double z() const { return d_.z(); }

 private:
  Vec3 d_;
};

/// Node/weight rule on the unit sphere, exact for spherical-harmonic
/// products Y_n conj(Y_n') with n + n' <= exact_degree.
/// Gauss-Legendre in cos(theta) tensored with uniform azimuth nodes.
struct QuadratureRule {
  std::vector<Vec3> nodes;      // unit directions
  std::vector<double> weights;  // steradian measure, sum = 4*pi
  int exact_degree = 0;

  std::size_t size() const { return nodes.size(); }
};

/// Builds the rule. exact_degree in [0, 200].
QuadratureRule build_quadrature(int exact_degree);

/// Maximum harmonic degree supported by the evaluator.
int max_harmonic_degree();

/// Orthonormal complex spherical harmonic with Condon-Shortley phase,
/// evaluated through the homogeneous-polynomial extension of r^n Y_n^m
/// (no coordinate singularities at the poles).
Cplx eval_scalar_sh(ShIndex idx, const Vec3& d);

/// Tangential surface gradient grad_S Y_n^m(d) = (I - d d^T) grad(r^n Y_n^m)
/// evaluated at |d| = 1.  d . result == 0 by construction.
CVec3 eval_surface_gradient_sh(ShIndex idx, const Vec3& d);

/// Value and surface gradient in one evaluation pass.
void eval_sh_with_gradient(ShIndex idx, const Vec3& d, Cplx& value, CVec3& grad_s);

/// Vectorial spherical harmonic of the given family; index ranges as above.
CVec3 eval_vsh(VshKind kind, ShIndex idx, const Vec3& d);

/// sum_k w_k f(d_k) conj(Y_n^m(d_k)).  samples must align with rule nodes.
Cplx project_scalar(std::span<const Cplx> samples, ShIndex idx, const QuadratureRule& rule);

/// Gauss-Legendre nodes/weights on [-1, 1] (Newton iteration on P_n).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace magloc
