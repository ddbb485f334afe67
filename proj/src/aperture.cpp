#include "magloc/aperture.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace magloc {

std::vector<VshBasisSpec::Entry> VshBasisSpec::enumerate() const {
  if (N1 < 0 || N2 < 0 || N3 < 0) throw ConfigError("basis degrees must be >= 0");
  std::vector<Entry> out;
  for (int n = 0; n <= N1; ++n)
    for (int m = -(n + 1); m <= n + 1; ++m) out.push_back({VshKind::I, n, m});
  for (int n = 1; n <= N2; ++n)
    for (int m = -n; m <= n; ++m) out.push_back({VshKind::T, n, m});
  for (int n = 1; n <= N3; ++n)
    for (int m = -(n - 1); m <= n - 1; ++m) out.push_back({VshKind::N, n, m});
  return out;
}

int VshBasisSpec::count() const { return static_cast<int>(enumerate().size()); }

CVecX regularized_solve(const CMatX& design, const CVecX& rhs, double floor) {
  if (design.rows() != rhs.size()) throw ShapeError("design/rhs row mismatch");
  if (floor < 0.0) throw ConfigError("truncation floor must be >= 0");
  Eigen::JacobiSVD<CMatX> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax <= 0.0) throw DegenerateSystemError("design matrix is identically zero");

  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  int kept = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > floor * smax) {
      inv(i) = 1.0 / s(i);
      ++kept;
    }
  }
  if (kept == 0) throw DegenerateSystemError("all singular values fall below the truncation floor");
  return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().adjoint() * rhs));
}

VshCoefficients fit_extension(const Measurement& partial, const VshBasisSpec& basis, double floor,
                              bool area_weighted, FitReport* report) {
  partial.validate();
  if (partial.size() == 0) throw EmptyApertureError("cannot fit an empty measurement");
  const auto entries = basis.enumerate();
  const int ncoef = static_cast<int>(entries.size());
  const int nsamp = static_cast<int>(partial.size());
  if (ncoef > 3 * nsamp) {
    std::ostringstream os;
    os << "basis has " << ncoef << " coefficients but only " << 3 * nsamp
       << " scalar equations are available";
    throw ConfigError(os.str());
  }

  CMatX A(3 * nsamp, ncoef);
  CVecX b(3 * nsamp);
  for (int k = 0; k < nsamp; ++k) {
    double w = 1.0;
    if (area_weighted && partial.weights) w = std::sqrt((*partial.weights)[k]);
    for (int j = 0; j < ncoef; ++j) {
      const auto& e = entries[j];
      const CVec3 v = eval_vsh(e.kind, {e.n, e.m}, partial.directions[k]);
      A.block<3, 1>(3 * k, j) = w * v;
    }
    b.segment<3>(3 * k) = w * partial.values[k];
  }

  Eigen::JacobiSVD<CMatX> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  int kept = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > floor * smax) {
      inv(i) = 1.0 / s(i);
      ++kept;
    }
  }
  if (kept == 0)
    throw IllConditionedFitError("extension design matrix degenerate below the truncation floor",
                                 cond);

  VshCoefficients out;
  out.basis = basis;
  out.values = svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().adjoint() * b));

  if (report) {
    report->residual_norm = (A * out.values - b).norm();
    const double bn = b.norm();
    report->relative_residual = bn > 0.0 ? report->residual_norm / bn : 0.0;
    report->condition_indicator = cond;
    report->truncated_count = static_cast<int>(s.size()) - kept;
  }
  return out;
}

Measurement evaluate_extension(const VshCoefficients& coeffs, const QuadratureRule& rule,
                               double R0) {
  const auto entries = coeffs.basis.enumerate();
  if (static_cast<Eigen::Index>(entries.size()) != coeffs.values.size())
    throw ShapeError("coefficient vector does not match its basis");
  Measurement out = measurement_on_rule(rule, R0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    CVec3 v = CVec3::Zero();
    for (std::size_t j = 0; j < entries.size(); ++j) {
      const auto& e = entries[j];
      v += coeffs.values(static_cast<Eigen::Index>(j)) *
           eval_vsh(e.kind, {e.n, e.m}, rule.nodes[k]);
    }
    out.values[k] = v;
  }
  return out;
}

namespace {
const char* family_name(VshKind k) {
  switch (k) {
    case VshKind::I: return "I";
    case VshKind::T: return "T";
    case VshKind::N: return "N";
  }
  return "?";
}
}  // namespace

void write_coefficients_csv(const VshCoefficients& coeffs, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f << "# magloc vsh coefficients v1\n";
  f << "# basis = " << coeffs.basis.N1 << ' ' << coeffs.basis.N2 << ' ' << coeffs.basis.N3 << "\n";
  f << "family,n,m,re,im\n";
  const auto entries = coeffs.basis.enumerate();
  char buf[96];
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const Cplx c = coeffs.values(static_cast<Eigen::Index>(j));
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.17g,%.17g", family_name(entries[j].kind),
                  entries[j].n, entries[j].m, c.real(), c.imag());
    f << buf << '\n';
  }
}

VshCoefficients read_coefficients_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for reading: " + path);
  VshCoefficients out;
  std::vector<Cplx> vals;
  std::string line;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string key, eq;
      is >> key >> eq;
      if (key == "basis") is >> out.basis.N1 >> out.basis.N2 >> out.basis.N3;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::istringstream is(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ShapeError("coefficient CSV row must have 5 columns");
    vals.emplace_back(std::stod(cells[3]), std::stod(cells[4]));
  }
  if (static_cast<int>(vals.size()) != out.basis.count())
    throw ShapeError("coefficient CSV row count does not match its declared basis");
  out.values = Eigen::Map<CVecX>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return out;
}

}  // namespace magloc
