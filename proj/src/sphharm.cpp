#include "magloc/sphharm.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace magloc {

namespace {

constexpr int kMaxDegree = 24;

// r^n Y_n^m as a homogeneous complex polynomial in (x, y, z).
struct Monomial {
  int px, py, pz;
  Cplx c;
};

struct SolidHarmonic {
  std::vector<Monomial> terms;
};

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binom(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Coefficients of the Legendre polynomial P_n in the monomial basis of t.
std::vector<double> legendre_coeffs(int n) {
  std::vector<double> pm1 = {1.0};       // P_0
  if (n == 0) return pm1;
  std::vector<double> p = {0.0, 1.0};    // P_1
  for (int k = 1; k < n; ++k) {
    // (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}
    std::vector<double> next(k + 2, 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) next[j + 1] += (2.0 * k + 1.0) * p[j];
    for (std::size_t j = 0; j < pm1.size(); ++j) next[j] -= k * pm1[j];
    for (double& c : next) c /= (k + 1.0);
    pm1 = std::move(p);
    p = std::move(next);
  }
  return p;
}

std::vector<double> differentiate(std::vector<double> c, int times) {
  for (int t = 0; t < times; ++t) {
    std::vector<double> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
    for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = c[j] * static_cast<double>(j);
    c = std::move(d);
  }
  return c;
}

void accumulate(std::vector<Monomial>& out, int px, int py, int pz, Cplx c) {
  for (Monomial& m : out) {
    if (m.px == px && m.py == py && m.pz == pz) {
      m.c += c;
      return;
    }
  }
  out.push_back({px, py, pz, c});
}

// Builds r^n Y_n^m for m >= 0:
//   N_nm (-1)^m (x + iy)^m sum_k a_k z^k (x^2+y^2+z^2)^{(n-m-k)/2},
// a_k the coefficients of d^m/dt^m P_n.  Negative m via
// Y_n^{-m} = (-1)^m conj(Y_n^m).
SolidHarmonic build_solid(int n, int m) {
  const int am = std::abs(m);
  const double norm = std::sqrt((2.0 * n + 1.0) / kFourPi * factorial(n - am) / factorial(n + am));
  const std::vector<double> dg = differentiate(legendre_coeffs(n), am);

  std::vector<Monomial> poly;
  const double sign_cs = (am % 2 == 0) ? 1.0 : -1.0;
  for (std::size_t k = 0; k < dg.size(); ++k) {
    if (dg[k] == 0.0) continue;
    const int e2 = n - am - static_cast<int>(k);  // power of r^2 * 2
    if (e2 < 0 || e2 % 2 != 0) continue;
    const int e = e2 / 2;
    // (x+iy)^am expansion
    for (int j = 0; j <= am; ++j) {
      Cplx ij = 1.0;
      for (int t = 0; t < j; ++t) ij *= Cplx(0.0, 1.0);
      const Cplx base = norm * sign_cs * dg[k] * binom(am, j) * ij;
      // (x^2+y^2+z^2)^e multinomial
      for (int a = 0; a <= e; ++a) {
        for (int b = 0; b <= e - a; ++b) {
          const int c = e - a - b;
          const double mult = factorial(e) / (factorial(a) * factorial(b) * factorial(c));
          accumulate(poly, am - j + 2 * a, j + 2 * b, static_cast<int>(k) + 2 * c, base * mult);
        }
      }
    }
  }

  if (m < 0) {
    const double s = (am % 2 == 0) ? 1.0 : -1.0;
    for (Monomial& mo : poly) mo.c = s * std::conj(mo.c);
  }
  return SolidHarmonic{std::move(poly)};
}

const SolidHarmonic& solid_harmonic(ShIndex idx) {
  static std::vector<std::vector<SolidHarmonic>> table;  // [n][m + n]
  static std::once_flag built;
  std::call_once(built, [] {
    table.resize(kMaxDegree + 1);
    for (int n = 0; n <= kMaxDegree; ++n) {
      table[n].reserve(2 * n + 1);
      for (int m = -n; m <= n; ++m) table[n].push_back(build_solid(n, m));
    }
  });
  if (idx.n < 0 || idx.n > kMaxDegree || std::abs(idx.m) > idx.n) {
    std::ostringstream os;
    os << "invalid spherical-harmonic index (n=" << idx.n << ", m=" << idx.m
       << "); supported degrees 0.." << kMaxDegree;
    throw IndexDomainError(os.str());
  }
  return table[idx.n][idx.m + idx.n];
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

UnitDirection::UnitDirection(const Vec3& v) {
  const double n = v.norm();
  if (n < 1e-14) throw NumericDegeneracyError("cannot normalize a near-zero direction");
  d_ = v / n;
}

int max_harmonic_degree() { return kMaxDegree; }

Cplx eval_scalar_sh(ShIndex idx, const Vec3& d) {
  const SolidHarmonic& sh = solid_harmonic(idx);
  Cplx v = 0.0;
  for (const Monomial& mo : sh.terms)
    v += mo.c * ipow(d.x(), mo.px) * ipow(d.y(), mo.py) * ipow(d.z(), mo.pz);
  return v;
}

void eval_sh_with_gradient(ShIndex idx, const Vec3& d, Cplx& value, CVec3& grad_s) {
  const SolidHarmonic& sh = solid_harmonic(idx);
  value = 0.0;
  CVec3 g = CVec3::Zero();
  for (const Monomial& mo : sh.terms) {
    const double xa = ipow(d.x(), mo.px);
    const double yb = ipow(d.y(), mo.py);
    const double zc = ipow(d.z(), mo.pz);
    value += mo.c * xa * yb * zc;
    if (mo.px > 0) g.x() += mo.c * (mo.px * ipow(d.x(), mo.px - 1) * yb * zc);
    if (mo.py > 0) g.y() += mo.c * (mo.py * xa * ipow(d.y(), mo.py - 1) * zc);
    if (mo.pz > 0) g.z() += mo.c * (mo.pz * xa * yb * ipow(d.z(), mo.pz - 1));
  }
  // Tangential projection removes the radial part n*Y_n^m of the
  // homogeneous-extension gradient.
  const Cplx radial = g.x() * d.x() + g.y() * d.y() + g.z() * d.z();
  grad_s = g - radial * d.cast<Cplx>();
}

CVec3 eval_surface_gradient_sh(ShIndex idx, const Vec3& d) {
  Cplx v;
  CVec3 g;
  eval_sh_with_gradient(idx, d, v, g);
  return g;
}

CVec3 eval_vsh(VshKind kind, ShIndex idx, const Vec3& d) {
  const int n = idx.n;
  const int m = idx.m;
  const CVec3 dc = d.cast<Cplx>();
  switch (kind) {
    case VshKind::I: {
      if (n < 0 || std::abs(m) > n + 1)
        throw IndexDomainError("VSH I family requires n >= 0, |m| <= n+1");
      Cplx v;
      CVec3 g;
      eval_sh_with_gradient({n + 1, m}, d, v, g);
      return g + static_cast<double>(n + 1) * v * dc;
    }
    case VshKind::T: {
      if (n < 1 || std::abs(m) > n)
        throw IndexDomainError("VSH T family requires n >= 1, |m| <= n");
      const CVec3 g = eval_surface_gradient_sh({n, m}, d);
      return g.cross(dc);
    }
    case VshKind::N: {
      if (n < 1 || std::abs(m) > n - 1)
        throw IndexDomainError("VSH N family requires n >= 1, |m| <= n-1");
      Cplx v;
      CVec3 g;
      eval_sh_with_gradient({n - 1, m}, d, v, g);
      return -g + static_cast<double>(n) * v * dc;
    }
  }
  throw IndexDomainError("unknown VSH family");
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule build_quadrature(int exact_degree) {
  if (exact_degree < 0) throw CapabilityError("exact_degree must be >= 0");
  if (exact_degree > 200) throw CapabilityError("exact_degree > 200 is not supported");
  const int ntheta = exact_degree / 2 + 1;   // GL exact through degree 2*ntheta-1 >= exact_degree
  const int nphi = exact_degree + 1;         // trapezoid exact for |m - m'| <= exact_degree

  std::vector<double> ct, wt;
  gauss_legendre(ntheta, ct, wt);

  QuadratureRule rule;
  rule.exact_degree = exact_degree;
  rule.nodes.reserve(static_cast<std::size_t>(ntheta) * nphi);
  rule.weights.reserve(static_cast<std::size_t>(ntheta) * nphi);
  const double wphi = 2.0 * kPi / nphi;
  for (int i = 0; i < ntheta; ++i) {
    const double st = std::sqrt(std::max(0.0, 1.0 - ct[i] * ct[i]));
    for (int j = 0; j < nphi; ++j) {
      const double phi = wphi * j;
      rule.nodes.emplace_back(st * std::cos(phi), st * std::sin(phi), ct[i]);
      rule.weights.push_back(wt[i] * wphi);
    }
  }
  return rule;
}

Cplx project_scalar(std::span<const Cplx> samples, ShIndex idx, const QuadratureRule& rule) {
  if (samples.size() != rule.size())
    throw ShapeError("sample count does not match quadrature node count");
  Cplx acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k)
    acc += rule.weights[k] * samples[k] * std::conj(eval_scalar_sh(idx, rule.nodes[k]));
  return acc;
}

}  // namespace magloc
