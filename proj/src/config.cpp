#include "magloc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace magloc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

double parse_real(const std::string& t, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number '" + t + "' in " + where);
  }
}

// Accepts "a", "bi", or "a+bi" / "a-bi" (exponent signs are skipped when
// locating the split).
Cplx parse_complex(const std::string& tok, const std::string& where) {
  std::string t = trim(tok);
  if (t.empty()) throw ConfigError("empty complex value in " + where);
  if (t.back() != 'i') return Cplx(parse_real(t, where), 0.0);
  t.pop_back();
  if (t.empty() || t == "+" || t == "-") return Cplx(0.0, t == "-" ? -1.0 : 1.0);
  std::size_t split = std::string::npos;
  for (std::size_t i = t.size(); i-- > 1;) {
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) return Cplx(0.0, parse_real(t, where));
  const std::string im = t.substr(split);
  return Cplx(parse_real(t.substr(0, split), where),
              (im == "+" || im == "-") ? (im == "-" ? -1.0 : 1.0) : parse_real(im, where));
}

Vec3 parse_vec3(const std::string& v, const std::string& where) {
  const auto ts = tokens(v);
  if (ts.size() != 3) throw ConfigError(where + " expects 3 numbers");
  return Vec3(parse_real(ts[0], where), parse_real(ts[1], where), parse_real(ts[2], where));
}

CVec3 parse_cvec3(const std::string& v, const std::string& where) {
  const auto ts = tokens(v);
  if (ts.size() != 3) throw ConfigError(where + " expects 3 (complex) entries");
  return CVec3(parse_complex(ts[0], where), parse_complex(ts[1], where),
               parse_complex(ts[2], where));
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean '" + v + "' in " + where);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_cplx(Cplx c) {
  if (c.imag() == 0.0) return fmt(c.real());
  std::string s = fmt(c.real());
  if (c.imag() >= 0.0) s += "+";
  return s + fmt(c.imag()) + "i";
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  if (quadrature_degree < 4) throw ConfigError("quadrature degree must be >= 4");
  if (beta < 0.0) throw ConfigError("beta must be >= 0");
  if (!(grid_inner > 0.0 && grid_inner < grid_outer)) throw ConfigError("invalid grid radii");
  if (!(grid_h > 0.0 && grid_h <= grid_outer - grid_inner))
    throw ConfigError("invalid grid spacing");
  if (!(peak_threshold > 0.0 && peak_threshold <= 1.0))
    throw ConfigError("peak threshold must lie in (0, 1]");
  if (peak_min_separation < 0.0) throw ConfigError("peak min separation must be >= 0");
  if (fit_floor < 0.0) throw ConfigError("fit floor must be >= 0");
  basis.enumerate();  // validates degrees
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.scenario.anomalies.clear();

  std::istringstream is(text);
  std::string line, section;
  Anomaly* anomaly = nullptr;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"scenario", "background", "anomaly", "quadrature",
                                    "noise",    "aperture",   "basis",   "grid",
                                    "peaks",    "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) throw ConfigError("unknown section [" + section + "]");
      if (section == "anomaly") {
        cfg.scenario.anomalies.emplace_back();
        anomaly = &cfg.scenario.anomalies.back();
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string where = "[" + section + "] " + key;

    if (section == "scenario") {
      if (key == "R0") cfg.scenario.R0 = parse_real(val, where);
      else if (key == "earth_radius") cfg.scenario.earth_radius = parse_real(val, where);
      else if (key == "core_radius") cfg.scenario.core_radius = parse_real(val, where);
      else if (key == "allow_surface_touching")
        cfg.scenario.allow_surface_touching = parse_bool(val, where);
      else throw ConfigError("unknown key " + where);
    } else if (section == "background") {
      if (key == "kind") {
        if (val == "uniform") cfg.scenario.background.kind = BackgroundKind::Uniform;
        else if (val == "axial_dipole") cfg.scenario.background.kind = BackgroundKind::AxialDipole;
        else if (val == "custom_coefficients")
          cfg.scenario.background.kind = BackgroundKind::CustomCoefficients;
        else throw ConfigError("unknown background kind '" + val + "'");
      } else if (key == "moment") {
        cfg.scenario.background.moment = parse_cvec3(val, where);
      } else {
        throw ConfigError("unknown key " + where);
      }
    } else if (section == "anomaly") {
      if (!anomaly) throw ConfigError("anomaly key outside an [anomaly] section");
      if (key == "position") anomaly->position = parse_vec3(val, where);
      else if (key == "delta") anomaly->delta = parse_real(val, where);
      else if (key == "polarization") {
        const auto ts = tokens(val);
        if (ts.size() == 1 && ts[0] == "identity") {
          anomaly->polarization = CMat3::Identity();
        } else if (ts.size() == 2 && ts[0] == "scalar") {
          anomaly->polarization = parse_complex(ts[1], where) * CMat3::Identity();
        } else if (ts.size() == 9) {
          for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
              anomaly->polarization(r, c) = parse_complex(ts[3 * r + c], where);
        } else {
          throw ConfigError(where + " expects 'identity', 'scalar C', or 9 complex entries");
        }
      } else throw ConfigError("unknown key " + where);
    } else if (section == "quadrature") {
      if (key == "degree") cfg.quadrature_degree = static_cast<int>(parse_real(val, where));
      else throw ConfigError("unknown key " + where);
    } else if (section == "noise") {
      if (key == "beta") cfg.beta = parse_real(val, where);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_real(val, where));
      else if (key == "mode") {
        if (val == "per_component") cfg.noise_mode = NoiseMode::PerComponent;
        else if (val == "per_sample") cfg.noise_mode = NoiseMode::PerSample;
        else throw ConfigError("unknown noise mode '" + val + "'");
      } else throw ConfigError("unknown key " + where);
    } else if (section == "aperture") {
      if (key == "kind") {
        if (val == "full") cfg.aperture.kind = ApertureSpec::Kind::Full;
        else if (val == "hemi") cfg.aperture.kind = ApertureSpec::Kind::Hemisphere;
        else if (val == "quarter") cfg.aperture.kind = ApertureSpec::Kind::Quarter;
        else if (val == "cap") cfg.aperture.kind = ApertureSpec::Kind::Cap;
        else throw ConfigError("unknown aperture kind '" + val + "'");
      } else if (key == "axis") cfg.aperture.axis = parse_vec3(val, where);
      else if (key == "axis2") cfg.aperture.axis2 = parse_vec3(val, where);
      else if (key == "angle") cfg.aperture.half_angle = parse_real(val, where);
      else if (key == "mode") {
        if (val == "extend") cfg.aperture_raw = false;
        else if (val == "raw") cfg.aperture_raw = true;
        else throw ConfigError("unknown aperture mode '" + val + "'");
      } else throw ConfigError("unknown key " + where);
    } else if (section == "basis") {
      if (key == "N1") cfg.basis.N1 = static_cast<int>(parse_real(val, where));
      else if (key == "N2") cfg.basis.N2 = static_cast<int>(parse_real(val, where));
      else if (key == "N3") cfg.basis.N3 = static_cast<int>(parse_real(val, where));
      else if (key == "floor") cfg.fit_floor = parse_real(val, where);
      else if (key == "weighted") cfg.fit_area_weighted = parse_bool(val, where);
      else throw ConfigError("unknown key " + where);
    } else if (section == "grid") {
      if (key == "h") cfg.grid_h = parse_real(val, where);
      else if (key == "inner") cfg.grid_inner = parse_real(val, where);
      else if (key == "outer") cfg.grid_outer = parse_real(val, where);
      else if (key == "slice") {
        if (val == "none") {
          cfg.slice.reset();
        } else {
          const auto ts = tokens(val);
          if (ts.size() != 8 || ts[0] != "point" || ts[4] != "normal")
            throw ConfigError("slice expects 'none' or 'point X Y Z normal X Y Z'");
          SliceSpec s;
          s.point = Vec3(parse_real(ts[1], where), parse_real(ts[2], where),
                         parse_real(ts[3], where));
          s.normal = Vec3(parse_real(ts[5], where), parse_real(ts[6], where),
                          parse_real(ts[7], where));
          cfg.slice = s;
        }
      } else throw ConfigError("unknown key " + where);
    } else if (section == "peaks") {
      if (key == "threshold") cfg.peak_threshold = parse_real(val, where);
      else if (key == "min_separation") cfg.peak_min_separation = parse_real(val, where);
      else throw ConfigError("unknown key " + where);
    } else if (section == "output") {
      if (key == "dir") cfg.output_dir = val;
      else throw ConfigError("unknown key " + where);
    } else {
      throw ConfigError("key before any section: " + line);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[scenario]\n";
  os << "R0 = " << fmt(c.scenario.R0) << "\n";
  os << "earth_radius = " << fmt(c.scenario.earth_radius) << "\n";
  os << "core_radius = " << fmt(c.scenario.core_radius) << "\n";
  os << "allow_surface_touching = " << (c.scenario.allow_surface_touching ? "true" : "false")
     << "\n";
  os << "\n[background]\n";
  os << "kind = "
     << (c.scenario.background.kind == BackgroundKind::Uniform
             ? "uniform"
             : (c.scenario.background.kind == BackgroundKind::AxialDipole ? "axial_dipole"
                                                                          : "custom_coefficients"))
     << "\n";
  os << "moment = " << fmt_cplx(c.scenario.background.moment.x()) << ' '
     << fmt_cplx(c.scenario.background.moment.y()) << ' '
     << fmt_cplx(c.scenario.background.moment.z()) << "\n";
  for (const Anomaly& a : c.scenario.anomalies) {
    os << "\n[anomaly]\n";
    os << "position = " << fmt(a.position.x()) << ' ' << fmt(a.position.y()) << ' '
       << fmt(a.position.z()) << "\n";
    os << "delta = " << fmt(a.delta) << "\n";
    if (a.polarization.isApprox(CMat3::Identity())) {
      os << "polarization = identity\n";
    } else {
      os << "polarization =";
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) os << ' ' << fmt_cplx(a.polarization(r, col));
      os << "\n";
    }
  }
  os << "\n[quadrature]\ndegree = " << c.quadrature_degree << "\n";
  os << "\n[noise]\nbeta = " << fmt(c.beta) << "\nseed = " << c.seed << "\nmode = "
     << (c.noise_mode == NoiseMode::PerComponent ? "per_component" : "per_sample") << "\n";
  os << "\n[aperture]\n";
  switch (c.aperture.kind) {
    case ApertureSpec::Kind::Full: os << "kind = full\n"; break;
    case ApertureSpec::Kind::Hemisphere: os << "kind = hemi\n"; break;
    case ApertureSpec::Kind::Quarter: os << "kind = quarter\n"; break;
    case ApertureSpec::Kind::Cap: os << "kind = cap\n"; break;
  }
  os << "axis = " << fmt(c.aperture.axis.x()) << ' ' << fmt(c.aperture.axis.y()) << ' '
     << fmt(c.aperture.axis.z()) << "\n";
  os << "axis2 = " << fmt(c.aperture.axis2.x()) << ' ' << fmt(c.aperture.axis2.y()) << ' '
     << fmt(c.aperture.axis2.z()) << "\n";
  os << "angle = " << fmt(c.aperture.half_angle) << "\n";
  os << "mode = " << (c.aperture_raw ? "raw" : "extend") << "\n";
  os << "\n[basis]\nN1 = " << c.basis.N1 << "\nN2 = " << c.basis.N2 << "\nN3 = " << c.basis.N3
     << "\nfloor = " << fmt(c.fit_floor) << "\nweighted = "
     << (c.fit_area_weighted ? "true" : "false") << "\n";
  os << "\n[grid]\nh = " << fmt(c.grid_h) << "\ninner = " << fmt(c.grid_inner)
     << "\nouter = " << fmt(c.grid_outer) << "\n";
  if (c.slice) {
    os << "slice = point " << fmt(c.slice->point.x()) << ' ' << fmt(c.slice->point.y()) << ' '
       << fmt(c.slice->point.z()) << " normal " << fmt(c.slice->normal.x()) << ' '
       << fmt(c.slice->normal.y()) << ' ' << fmt(c.slice->normal.z()) << "\n";
  } else {
    os << "slice = none\n";
  }
  // The output directory is runtime state (--out / [output] dir) and is
  // deliberately not echoed, so rerun artifacts stay byte-identical across
  // destinations.
  os << "\n[peaks]\nthreshold = " << fmt(c.peak_threshold)
     << "\nmin_separation = " << fmt(c.peak_min_separation) << "\n";
  return os.str();
}

namespace {

RunConfig base_preset() {
  RunConfig c;
  c.scenario.anomalies.clear();
  c.scenario.background.kind = BackgroundKind::AxialDipole;
  c.scenario.background.moment = CVec3(0, 0, 1);
  c.scenario.R0 = 7.0;
  c.scenario.earth_radius = 1.0;
  c.scenario.core_radius = 0.5;
  return c;
}

void add_anomaly(RunConfig& c, const Vec3& pos, double delta) {
  Anomaly a;
  a.position = pos;
  a.delta = delta;
  c.scenario.anomalies.push_back(a);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"ex1a", "ex1b", "ex2a", "ex2b", "ex2b-close", "ex3",
          "ex4-full", "ex4-hemi", "ex4-quarter"};
}

bool is_preset(const std::string& name) {
  for (const auto& n : preset_names())
    if (n == name) return true;
  return false;
}

RunConfig preset_config(const std::string& name) {
  RunConfig c = base_preset();
  if (name == "ex1a") {
    // Single anomaly halfway between core and surface, heavy noise.
    add_anomaly(c, Vec3(0.75, 0.0, 0.0), 0.02);
    c.beta = 0.20;
    c.quadrature_degree = 64;
  } else if (name == "ex1b") {
    // Surface-adjacent anomaly.
    add_anomaly(c, Vec3(0.99, 0.0, 0.0), 0.01);
    c.beta = 0.10;
    c.quadrature_degree = 64;
  } else if (name == "ex2a") {
    // Four well-separated anomalies at different depths (y-z plane).
    add_anomaly(c, Vec3(0.0, 0.75, 0.0), 0.02);
    add_anomaly(c, Vec3(0.0, 0.0, 0.8), 0.02);
    add_anomaly(c, Vec3(0.0, -0.65, 0.25), 0.02);
    add_anomaly(c, Vec3(0.0, 0.35, -0.7), 0.02);
    c.beta = 0.10;
    c.quadrature_degree = 64;
  } else if (name == "ex2b") {
    // Two anomalies at separation 0.20.
    add_anomaly(c, Vec3(0.0, 0.70, 0.10), 0.03);
    add_anomaly(c, Vec3(0.0, 0.70, -0.10), 0.03);
    c.beta = 0.10;
    c.quadrature_degree = 64;
  } else if (name == "ex2b-close") {
    // Two anomalies at separation 0.04, below the resolution limit.
    add_anomaly(c, Vec3(0.0, 0.70, 0.02), 0.03);
    add_anomaly(c, Vec3(0.0, 0.70, -0.02), 0.03);
    c.beta = 0.10;
    c.quadrature_degree = 64;
  } else if (name == "ex3") {
    // L-shaped chain in the y-z plane; per-dipole delta keeps the total
    // delta^3 volume equal to an extended body of 0.03 cross-section and
    // 0.5 arm length.
    const Vec3 corner(0.0, 0.52, 0.02);
    const int n_arm = 16;
    std::vector<Vec3> chain;
    for (int i = 0; i < n_arm; ++i)
      chain.push_back(corner + (0.46 * i / (n_arm - 1.0)) * Vec3(0, 1, 0));
    for (int i = 1; i < n_arm; ++i)
      chain.push_back(corner + (0.48 * i / (n_arm - 1.0)) * Vec3(0, 0, 1));
    const double volume = 2.0 * 0.5 * 0.03 * 0.03;
    const double delta = std::cbrt(volume / chain.size());
    for (const Vec3& p : chain) add_anomaly(c, p, delta);
    c.beta = 0.10;
    c.quadrature_degree = 48;
    c.slice = SliceSpec{Vec3::Zero(), Vec3(1, 0, 0)};
  } else if (name == "ex4-full" || name == "ex4-hemi" || name == "ex4-quarter") {
    add_anomaly(c, Vec3(0.75, 0.0, 0.0), 0.02);
    c.beta = 0.01;
    c.quadrature_degree = 24;
    if (name == "ex4-hemi") {
      c.aperture.kind = ApertureSpec::Kind::Hemisphere;
      c.aperture.axis = Vec3(1, 0, 0);
    } else if (name == "ex4-quarter") {
      c.aperture.kind = ApertureSpec::Kind::Quarter;
      c.aperture.axis = Vec3(1, 0, 0);
      c.aperture.axis2 = Vec3(0, 1, 0);
    }
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

}  // namespace magloc
