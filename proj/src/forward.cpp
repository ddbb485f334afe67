#include "magloc/forward.hpp"

#include <cmath>
#include <sstream>

#include "magloc/rng.hpp"

namespace magloc {

void Scenario::validate() const {
  if (!(R0 > earth_radius && earth_radius > core_radius && core_radius > 0.0))
    throw ConfigError("scenario radii must satisfy R0 > earth_radius > core_radius > 0");
  if (background.moment.norm() == 0.0) throw ConfigError("background moment must be nonzero");
  for (const Anomaly& a : anomalies) {
    const double r = a.position.norm();
    if (a.delta <= 0.0) throw ConfigError("anomaly delta must be positive");
    if (!allow_surface_touching && !(r > core_radius && r < earth_radius)) {
      std::ostringstream os;
      os << "anomaly at radius " << r << " lies outside the open shell (" << core_radius << ", "
         << earth_radius << "); set allow_surface_touching for boundary placements";
      throw ConfigError(os.str());
    }
    if (allow_surface_touching && !(r > core_radius && r <= earth_radius + 1e-12))
      throw ConfigError("anomaly lies outside the shell even with surface touching allowed");
  }
}

std::vector<std::string> Scenario::warnings() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < anomalies.size(); ++i) {
    if (anomalies[i].delta > 0.1) {
      std::ostringstream os;
      os << "anomaly " << i << ": delta = " << anomalies[i].delta
         << " is large for the leading-order model (expected << 1)";
      out.push_back(os.str());
    }
    for (std::size_t j = i + 1; j < anomalies.size(); ++j) {
      const double d = (anomalies[i].position - anomalies[j].position).norm();
      if (d < 0.05) {
        std::ostringstream os;
        os << "anomalies " << i << " and " << j << " are separated by " << d
           << ", below the 0.05 resolution limit";
        out.push_back(os.str());
      }
    }
  }
  return out;
}

Mat3 hessian_gamma0(const Vec3& r) {
  const double n = r.norm();
  if (n < 1e-9) throw SingularityError("hessian_gamma0 evaluated at a near-singular point");
  const Vec3 rh = r / n;
  return (Mat3::Identity() - 3.0 * rh * rh.transpose()) / (kFourPi * n * n * n);
}

Vec3 gradient_gamma0(const Vec3& r) {
  const double n = r.norm();
  if (n < 1e-9) throw SingularityError("gradient_gamma0 evaluated at a near-singular point");
  return r / (kFourPi * n * n * n);
}

CVec3 background_field(const BackgroundSpec& spec, const Vec3& x, double core_radius) {
  switch (spec.kind) {
    case BackgroundKind::Uniform:
      return spec.moment;
    case BackgroundKind::AxialDipole:
    case BackgroundKind::CustomCoefficients: {
      const double n = x.norm();
      if (n <= core_radius)
        throw Error("dipole background evaluated inside the core");
      if (n < 1e-12) throw SingularityError("dipole background evaluated at the origin");
      const Vec3 xh = x / n;
      const CVec3 m = spec.moment;
      const Cplx xm = xh.x() * m.x() + xh.y() * m.y() + xh.z() * m.z();
      return (3.0 * xm * xh.cast<Cplx>() - m) / (kFourPi * n * n * n);
    }
  }
  throw Error("unknown background kind");
}

Measurement synthesize(const Scenario& scenario, const QuadratureRule& rule) {
  scenario.validate();
  if (rule.size() == 0) throw ShapeError("empty quadrature rule");
  Measurement meas = measurement_on_rule(rule, scenario.R0);

  // Per-anomaly induced dipole moment delta^3 P_l H0(z_l).
  std::vector<CVec3> moments;
  moments.reserve(scenario.anomalies.size());
  for (const Anomaly& a : scenario.anomalies) {
    const CVec3 h0 = background_field(scenario.background, a.position, scenario.core_radius);
    moments.push_back(std::pow(a.delta, 3) * (a.polarization * h0));
  }

  for (std::size_t k = 0; k < rule.size(); ++k) {
    CVec3 v = CVec3::Zero();
    const Vec3 x = scenario.R0 * rule.nodes[k];
    for (std::size_t l = 0; l < scenario.anomalies.size(); ++l) {
      const Mat3 h = hessian_gamma0(x - scenario.anomalies[l].position);
      v += h.cast<Cplx>() * moments[l];
    }
    meas.values[k] = v;
  }
  return meas;
}

Measurement corrupt(const Measurement& meas, double beta, std::uint64_t seed, NoiseMode mode) {
  meas.validate();
  if (beta < 0.0) throw ConfigError("noise level beta must be >= 0");
  Measurement out = meas;
  if (beta == 0.0) return out;

  double max_abs = 0.0;
  for (const CVec3& v : meas.values)
    for (int c = 0; c < 3; ++c) max_abs = std::max(max_abs, std::abs(v[c]));

  const CounterRng rng(seed);
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (int c = 0; c < 3; ++c) {
      const std::uint64_t cc = (mode == NoiseMode::PerComponent) ? c : 0;
      const double z1 = rng.uniform_pm1(k, cc, 0);
      const double z2 = rng.uniform_pm1(k, cc, 1);
      out.values[k][c] += beta * z1 * max_abs * std::exp(Cplx(0.0, 2.0 * kPi * z2));
    }
  }
  return out;
}

bool ApertureSpec::contains(const Vec3& d) const {
  constexpr double tie = 1e-12;
  switch (kind) {
    case Kind::Full:
      return true;
    case Kind::Hemisphere:
      return d.dot(axis.normalized()) > -tie;
    case Kind::Quarter:
      return d.dot(axis.normalized()) > -tie && d.dot(axis2.normalized()) > -tie;
    case Kind::Cap:
      return d.dot(axis.normalized()) >= std::cos(half_angle) - tie;
  }
  return false;
}

Measurement restrict_measurement(const Measurement& meas, const ApertureSpec& cap) {
  meas.validate();
  Measurement out;
  out.radius = meas.radius;
  out.metadata = meas.metadata;
  for (std::size_t k = 0; k < meas.size(); ++k) {
    if (cap.contains(meas.directions[k])) {
      out.directions.push_back(meas.directions[k]);
      out.values.push_back(meas.values[k]);
    }
  }
  if (out.directions.empty()) throw EmptyApertureError("aperture restriction kept no samples");
  return out;
}

Measurement reattach_weights(const Measurement& partial, const QuadratureRule& rule) {
  partial.validate();
  Measurement out = partial;
  std::vector<double> w(partial.size());
  for (std::size_t k = 0; k < partial.size(); ++k) {
    bool found = false;
    for (std::size_t j = 0; j < rule.size(); ++j) {
      if ((partial.directions[k] - rule.nodes[j]).norm() < 1e-12) {
        w[k] = rule.weights[j];
        found = true;
        break;
      }
    }
    if (!found)
      throw ShapeError("partial measurement direction is not a node of the given rule");
  }
  out.weights = std::move(w);
  return out;
}

}  // namespace magloc
