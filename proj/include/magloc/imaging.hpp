#pragma once

#include <array>
#include <vector>

#include "magloc/measurement.hpp"
#include "magloc/sphharm.hpp"
#include "magloc/types.hpp"

namespace magloc {

/// The two projection vectors extracted from a weighted measurement:
///   P = int (xhat . H~(R0 xhat)) xhat ds            (C^3)
///   Q = int (xhat . H~(R0 xhat)) conj(Y_2) ds       (C^5, m = -2..2)
struct ProjectionData {
  CVec3 P = CVec3::Zero();
  CVec5 Q = CVec5::Zero();
  double R0 = 0.0;
};

CVec3 compute_P(const Measurement& meas);
CVec5 compute_Q(const Measurement& meas);
ProjectionData compute_projections(const Measurement& meas);

/// 5x3 transfer matrix at a sampling point; row m is T~_m(z)^T.
struct TransferMatrix {
  CMat53 T = CMat53::Zero();
  Vec3 z = Vec3::Zero();
};

/// ztilde(z): components conj(Y_1^{i-2}(zhat)) |z|, i = 1..3.  Linear in z.
CVec3 z_tilde(const Vec3& z);

/// Caches the five constant integral blocks
///   B_h(m, :) = int (2 Y_1^h xhat - grad_S Y_1^h) conj(Y_2^m) ds,  h = -1..1,
/// over the given nodes/weights (full rule or a restricted aperture), so a
/// transfer matrix is a 3-term linear combination per sampling point.
class TransferEvaluator {
 public:
  explicit TransferEvaluator(const QuadratureRule& rule);
  TransferEvaluator(const std::vector<Vec3>& nodes, const std::vector<double>& weights);

  TransferMatrix at(const Vec3& z) const;  // throws on z = 0
  const std::array<CMat53, 3>& blocks() const { return blocks_; }

 private:
  void build(const std::vector<Vec3>& nodes, const std::vector<double>& weights);
  std::array<CMat53, 3> blocks_;  // index h + 1
};

TransferMatrix compute_T_tilde(const Vec3& z, const QuadratureRule& rule);

/// Scale c such that c * T~(z1) P reproduces the degree-2 data projection Q
/// of a point dipole at z1 exactly; this is what makes ||Q - Q_z|| vanish at
/// the true location.  Value 3/(2 R0), verified against quadrature in tests.
double qz_scale(double R0);

/// Q_z = qz_scale(R0) * T~(z) P.
CVec5 compute_Qz(const Vec3& z, const CVec3& P, double R0, const TransferEvaluator& te);
CVec5 compute_Qz(const Vec3& z, const CVec3& P, double R0, const QuadratureRule& rule);

struct IndicatorValue {
  double value = 0.0;
  bool saturated = false;  // denominator hit the floor (essentially at the source)
};

/// I(z) = 2||P|| / (3 R0 ||Q - Q_z||), with the denominator floored at
/// 1e-12 ||Q|| to keep the map finite at the blow-up point.
IndicatorValue indicator(const Vec3& z, const ProjectionData& pd, const TransferEvaluator& te);

/// Constant 3x5 matrices N^(m) with N_2^m(xhat) = N^(m) Y_2(xhat), m = -1..1.
struct NMatrices {
  std::array<CMat35, 3> N;  // index m + 1
};

/// The closed-form constants.
NMatrices n_matrices();

/// Quadrature re-derivation: N^(m)(j, m'+2) = <(N_2^m)_j, Y_2^m'>.
NMatrices derive_n_matrices(const QuadratureRule& rule);

/// Five 3x3 matrices D_m with (D_m)_{ij} = N^(i-2)(j, m+2), so that
/// row_m(T~(z)) = ztilde(z)^T D_m.
struct DMatrices {
  std::array<CMat3, 5> D;  // index m + 2
};

DMatrices d_matrices(const NMatrices& nm);

struct MinMaxBound {
  double value = 0.0;
  CVec3 argmin = CVec3::Zero();
  bool converged = false;
};

/// min over unit y in C^3 of max_m |y^T D_m p_hat|; positive by the rank
/// property of [D_{-2} a, ..., D_2 a].  Coarse deterministic sampling of the
/// real 5-sphere followed by Nelder-Mead refinement (the objective is a max
/// of moduli, so derivative-free refinement).
MinMaxBound min_bound_constant(const CVec3& p_hat, const DMatrices& dm,
                               int coarse_samples = 20000, int refine_iters = 600);

/// The displayed general expansion coefficient vector
///   T_{n,m} = sum_h conj(Y_{n-1}^h(z1hat)) |z1|^{n-1} /
///             ((2n-1)(-n-1) R^{n+2}) int (n Y_{n-1}^h xhat - grad_S Y_{n-1}^h)
///             conj(Y_n^m) ds.
CVec3 expansion_coeff_T(int n, int m, const Vec3& z1, double R, const QuadratureRule& rule);

/// Partial sum through degree N of the separable expansion of
/// grad Gamma_0(x - z), valid for |z| < |x|; converges to
/// (x - z)/(4 pi |x-z|^3).
Vec3 gradient_gamma0_series(const Vec3& x, const Vec3& z, int N);

}  // namespace magloc
