#include "magloc/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "magloc/rng.hpp"

namespace magloc {

namespace {

std::vector<Cplx> radial_samples(const Measurement& meas) {
  std::vector<Cplx> f(meas.size());
  for (std::size_t k = 0; k < meas.size(); ++k) {
    const Vec3& d = meas.directions[k];
    const CVec3& v = meas.values[k];
    f[k] = d.x() * v.x() + d.y() * v.y() + d.z() * v.z();
  }
  return f;
}

void require_weights(const Measurement& meas) {
  meas.validate();
  if (!meas.has_weights())
    throw NeedsQuadratureError(
        "projection integrals need quadrature weights; run the aperture extension first or "
        "opt into raw partial integration by re-attaching rule weights");
}

}  // namespace

CVec3 compute_P(const Measurement& meas) {
  require_weights(meas);
  const auto f = radial_samples(meas);
  const auto& w = *meas.weights;
  CVec3 acc = CVec3::Zero();
  for (std::size_t k = 0; k < meas.size(); ++k) acc += w[k] * f[k] * meas.directions[k].cast<Cplx>();
  return acc;
}

CVec5 compute_Q(const Measurement& meas) {
  require_weights(meas);
  const auto f = radial_samples(meas);
  const auto& w = *meas.weights;
  CVec5 q = CVec5::Zero();
  for (std::size_t k = 0; k < meas.size(); ++k) {
    const Cplx wf = w[k] * f[k];
    for (int m = -2; m <= 2; ++m)
      q[m + 2] += wf * std::conj(eval_scalar_sh({2, m}, meas.directions[k]));
  }
  return q;
}

ProjectionData compute_projections(const Measurement& meas) {
  ProjectionData pd;
  pd.P = compute_P(meas);
  pd.Q = compute_Q(meas);
  pd.R0 = meas.radius;
  return pd;
}

CVec3 z_tilde(const Vec3& z) {
  const double n = z.norm();
  if (n < 1e-300) throw NumericDegeneracyError("z_tilde at the origin");
  const Vec3 zh = z / n;
  CVec3 zt;
  for (int i = 0; i < 3; ++i) zt[i] = std::conj(eval_scalar_sh({1, i - 1}, zh)) * n;
  return zt;
}

TransferEvaluator::TransferEvaluator(const QuadratureRule& rule) {
  build(rule.nodes, rule.weights);
}

TransferEvaluator::TransferEvaluator(const std::vector<Vec3>& nodes,
                                     const std::vector<double>& weights) {
  build(nodes, weights);
}

void TransferEvaluator::build(const std::vector<Vec3>& nodes, const std::vector<double>& weights) {
  if (nodes.size() != weights.size()) throw ShapeError("node/weight length mismatch");
  for (auto& b : blocks_) b.setZero();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Vec3& d = nodes[k];
    for (int h = -1; h <= 1; ++h) {
      Cplx y1;
      CVec3 g1;
      eval_sh_with_gradient({1, h}, d, y1, g1);
      const CVec3 integrand_vec = 2.0 * y1 * d.cast<Cplx>() - g1;
      for (int m = -2; m <= 2; ++m) {
        const Cplx wy2 = weights[k] * std::conj(eval_scalar_sh({2, m}, d));
        blocks_[h + 1].row(m + 2) += (wy2 * integrand_vec).transpose();
      }
    }
  }
}

TransferMatrix TransferEvaluator::at(const Vec3& z) const {
  if (z.norm() < 1e-300) throw NumericDegeneracyError("transfer matrix at the origin");
  const CVec3 zt = z_tilde(z);
  TransferMatrix tm;
  tm.z = z;
  tm.T = zt[0] * blocks_[0] + zt[1] * blocks_[1] + zt[2] * blocks_[2];
  return tm;
}

TransferMatrix compute_T_tilde(const Vec3& z, const QuadratureRule& rule) {
  return TransferEvaluator(rule).at(z);
}

double qz_scale(double R0) { return 3.0 / (2.0 * R0); }

CVec5 compute_Qz(const Vec3& z, const CVec3& P, double R0, const TransferEvaluator& te) {
  if (R0 <= 0.0) throw ConfigError("R0 must be positive");
  return qz_scale(R0) * (te.at(z).T * P);
}

CVec5 compute_Qz(const Vec3& z, const CVec3& P, double R0, const QuadratureRule& rule) {
  return compute_Qz(z, P, R0, TransferEvaluator(rule));
}

IndicatorValue indicator(const Vec3& z, const ProjectionData& pd, const TransferEvaluator& te) {
  const double pnorm = pd.P.norm();
  if (pnorm == 0.0) throw DegenerateDataError("||P|| = 0: no anomaly signal in the data");
  const CVec5 qz = qz_scale(pd.R0) * (te.at(z).T * pd.P);
  const double floor = 1e-12 * pd.Q.norm() + 1e-300;
  const double den = (pd.Q - qz).norm();
  IndicatorValue out;
  out.saturated = den < floor;
  out.value = 2.0 * pnorm / (3.0 * pd.R0 * std::max(den, floor));
  return out;
}

NMatrices n_matrices() {
  const double s5 = std::sqrt(5.0), s30 = std::sqrt(30.0);
  const double s10 = std::sqrt(10.0), s15 = std::sqrt(15.0);
  const Cplx i(0.0, 1.0);
  NMatrices nm;
  for (auto& n : nm.N) n.setZero();
  CMat35& a = nm.N[0];  // m = -1
  a(0, 0) = 3.0 * s5 / 5.0;
  a(0, 2) = -s30 / 10.0;
  a(1, 0) = 3.0 * s5 / 5.0 * i;
  a(1, 2) = s30 / 10.0 * i;
  a(2, 1) = 3.0 * s5 / 5.0;
  CMat35& b = nm.N[1];  // m = 0
  b(0, 1) = 3.0 * s10 / 10.0;
  b(0, 3) = -3.0 * s10 / 10.0;
  b(1, 1) = 3.0 * s10 / 10.0 * i;
  b(1, 3) = 3.0 * s10 / 10.0 * i;
  b(2, 2) = 2.0 * s15 / 5.0;
  CMat35& c = nm.N[2];  // m = +1
  c(0, 2) = s30 / 10.0;
  c(0, 4) = -3.0 * s5 / 5.0;
  c(1, 2) = s30 / 10.0 * i;
  c(1, 4) = 3.0 * s5 / 5.0 * i;
  c(2, 3) = 3.0 * s5 / 5.0;
  return nm;
}

NMatrices derive_n_matrices(const QuadratureRule& rule) {
  if (rule.exact_degree < 5)
    throw CapabilityError("derive_n_matrices needs quadrature exact_degree >= 5");
  NMatrices nm;
  for (auto& n : nm.N) n.setZero();
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const Vec3& d = rule.nodes[k];
    for (int m = -1; m <= 1; ++m) {
      const CVec3 v = eval_vsh(VshKind::N, {2, m}, d);
      for (int mp = -2; mp <= 2; ++mp) {
        const Cplx wy = rule.weights[k] * std::conj(eval_scalar_sh({2, mp}, d));
        nm.N[m + 1].col(mp + 2) += wy * v;
      }
    }
  }
  return nm;
}

DMatrices d_matrices(const NMatrices& nm) {
  DMatrices dm;
  for (int m = -2; m <= 2; ++m)
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j)
        dm.D[m + 2](i - 1, j - 1) = nm.N[i - 1](j - 1, m + 2);  // n^{(i-2)}_{j, m+3}
  return dm;
}

namespace {

double minmax_objective(const CVec3& y, const DMatrices& dm, const CVec3& p_hat) {
  double best = 0.0;
  for (int m = 0; m < 5; ++m) {
    const CVec3 dp = dm.D[m] * p_hat;
    const Cplx v = y.x() * dp.x() + y.y() * dp.y() + y.z() * dp.z();  // y^T D_m p, bilinear
    best = std::max(best, std::abs(v));
  }
  return best;
}

CVec3 from_r6(const Eigen::Matrix<double, 6, 1>& u) {
  CVec3 y(Cplx(u[0], u[1]), Cplx(u[2], u[3]), Cplx(u[4], u[5]));
  const double n = y.norm();
  if (n < 1e-14) return CVec3(1, 0, 0);
  return y / n;
}

}  // namespace

MinMaxBound min_bound_constant(const CVec3& p_hat, const DMatrices& dm, int coarse_samples,
                               int refine_iters) {
  if (std::abs(p_hat.norm() - 1.0) > 1e-8)
    throw ShapeError("min_bound_constant expects a unit vector");

  using R6 = Eigen::Matrix<double, 6, 1>;
  const CounterRng rng(0xB0D5u);
  R6 best_u;
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < coarse_samples; ++s) {
    R6 u;
    for (int j = 0; j < 6; ++j) u[j] = rng.uniform_pm1(s, j, 2);
    if (u.norm() < 1e-12) continue;
    const double v = minmax_objective(from_r6(u), dm, p_hat);
    if (v < best) {
      best = v;
      best_u = u / u.norm();
    }
  }

  // Nelder-Mead on R^6 (objective normalizes internally).
  const auto f = [&](const R6& u) { return minmax_objective(from_r6(u), dm, p_hat); };
  std::array<R6, 7> sim;
  std::array<double, 7> fv;
  sim[0] = best_u;
  for (int j = 1; j <= 6; ++j) {
    sim[j] = best_u;
    sim[j][j - 1] += 0.05;
  }
  for (int j = 0; j <= 6; ++j) fv[j] = f(sim[j]);
  bool converged = false;
  for (int it = 0; it < refine_iters; ++it) {
    std::array<int, 7> order;
    for (int j = 0; j <= 6; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    if (fv[order[6]] - fv[order[0]] < 1e-14 * (1.0 + std::abs(fv[order[0]]))) {
      converged = true;
      break;
    }
    R6 centroid = R6::Zero();
    for (int j = 0; j <= 5; ++j) centroid += sim[order[j]];
    centroid /= 6.0;
    const int worst = order[6];
    const R6 refl = centroid + (centroid - sim[worst]);
    const double fr = f(refl);
    if (fr < fv[order[0]]) {
      const R6 expd = centroid + 2.0 * (centroid - sim[worst]);
      const double fe = f(expd);
      if (fe < fr) {
        sim[worst] = expd;
        fv[worst] = fe;
      } else {
        sim[worst] = refl;
        fv[worst] = fr;
      }
    } else if (fr < fv[order[5]]) {
      sim[worst] = refl;
      fv[worst] = fr;
    } else {
      const R6 contr = centroid + 0.5 * (sim[worst] - centroid);
      const double fc = f(contr);
      if (fc < fv[worst]) {
        sim[worst] = contr;
        fv[worst] = fc;
      } else {
        for (int j = 1; j <= 6; ++j) {
          sim[order[j]] = sim[order[0]] + 0.5 * (sim[order[j]] - sim[order[0]]);
          fv[order[j]] = f(sim[order[j]]);
        }
      }
    }
  }

  int arg = 0;
  for (int j = 1; j <= 6; ++j)
    if (fv[j] < fv[arg]) arg = j;
  MinMaxBound out;
  out.value = fv[arg];
  out.argmin = from_r6(sim[arg]);
  out.converged = converged;
  return out;
}

CVec3 expansion_coeff_T(int n, int m, const Vec3& z1, double R, const QuadratureRule& rule) {
  if (n < 1 || std::abs(m) > n) throw IndexDomainError("expansion_coeff_T requires n >= 1, |m| <= n");
  const double zn = z1.norm();
  if (!(zn > 0.0 && zn < R)) throw IndexDomainError("expansion_coeff_T requires 0 < |z1| < R");
  const Vec3 zh = z1 / zn;

  CVec3 acc = CVec3::Zero();
  const double pref_den = (2.0 * n - 1.0) * (-static_cast<double>(n) - 1.0) * std::pow(R, n + 2);
  for (int h = -(n - 1); h <= n - 1; ++h) {
    CVec3 integ = CVec3::Zero();
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const Vec3& d = rule.nodes[k];
      Cplx y;
      CVec3 g;
      eval_sh_with_gradient({n - 1, h}, d, y, g);
      const CVec3 vec = static_cast<double>(n) * y * d.cast<Cplx>() - g;
      integ += rule.weights[k] * std::conj(eval_scalar_sh({n, m}, d)) * vec;
    }
    acc += std::conj(eval_scalar_sh({n - 1, h}, zh)) * std::pow(zn, n - 1) / pref_den * integ;
  }
  return acc;
}

Vec3 gradient_gamma0_series(const Vec3& x, const Vec3& z, int N) {
  const double R = x.norm();
  const double zn = z.norm();
  if (!(zn < R)) throw DivergenceDomainError("series requires |z| < |x|");
  if (N < 0) throw IndexDomainError("truncation degree must be >= 0");
  const Vec3 xh = x / R;
  const Vec3 zh = zn > 0.0 ? Vec3(z / zn) : Vec3(0, 0, 1);  // |z|^n kills zh at n >= 1 when z = 0

  CVec3 acc = CVec3::Zero();
  for (int n = 0; n <= N; ++n) {
    const double radial = std::pow(zn, n) / ((2.0 * n + 1.0) * std::pow(R, n + 2));
    for (int m = -n; m <= n; ++m) {
      Cplx y;
      CVec3 g;
      eval_sh_with_gradient({n, m}, xh, y, g);
      const CVec3 vec = (n + 1.0) * y * xh.cast<Cplx>() - g;
      acc += radial * std::conj(eval_scalar_sh({n, m}, zh)) * vec;
    }
  }
  // The expansion of a real kernel; the imaginary part cancels.
  return Vec3(acc.x().real(), acc.y().real(), acc.z().real());
}

}  // namespace magloc
