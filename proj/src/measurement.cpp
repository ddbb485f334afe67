#include "magloc/measurement.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace magloc {

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void Measurement::validate() const {
  if (directions.size() != values.size())
    throw ShapeError("measurement directions/values length mismatch");
  if (weights && weights->size() != directions.size())
    throw ShapeError("measurement weights length mismatch");
  if (radius <= 0.0) throw ShapeError("measurement radius must be positive");
}

Measurement measurement_on_rule(const QuadratureRule& rule, double radius) {
  Measurement m;
  m.directions = rule.nodes;
  m.weights = rule.weights;
  m.radius = radius;
  m.values.assign(rule.size(), CVec3::Zero());
  return m;
}

void write_measurement_csv(const Measurement& meas, const std::string& path) {
  meas.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f << "# magloc measurement v1\n";
  f << "# radius = " << fmt_g17(meas.radius) << "\n";
  for (const auto& [k, v] : meas.metadata) f << "# " << k << " = " << v << "\n";
  f << "dir_x,dir_y,dir_z,re_hx,im_hx,re_hy,im_hy,re_hz,im_hz,weight\n";
  for (std::size_t i = 0; i < meas.size(); ++i) {
    const Vec3& d = meas.directions[i];
    const CVec3& v = meas.values[i];
    f << fmt_g17(d.x()) << ',' << fmt_g17(d.y()) << ',' << fmt_g17(d.z());
    for (int c = 0; c < 3; ++c)
      f << ',' << fmt_g17(v[c].real()) << ',' << fmt_g17(v[c].imag());
    f << ',';
    if (meas.weights) f << fmt_g17((*meas.weights)[i]);
    f << '\n';
  }
}

Measurement read_measurement_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for reading: " + path);
  Measurement m;
  bool any_weight = false, header_seen = false;
  std::vector<double> wts;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(body.substr(0, eq));
        const std::string val = trim(body.substr(eq + 1));
        if (key == "radius")
          m.radius = std::stod(val);
        else
          m.metadata[key] = val;
      }
      continue;
    }
    if (!header_seen) {  // column header line
      header_seen = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 10) throw ShapeError("measurement CSV row must have 10 columns");
    m.directions.emplace_back(std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2]));
    CVec3 v;
    for (int c = 0; c < 3; ++c)
      v[c] = Cplx(std::stod(cells[3 + 2 * c]), std::stod(cells[4 + 2 * c]));
    m.values.push_back(v);
    const std::string w = trim(cells[9]);
    if (!w.empty()) {
      any_weight = true;
      wts.push_back(std::stod(w));
    } else {
      wts.push_back(0.0);
    }
  }
  if (any_weight) m.weights = std::move(wts);
  m.validate();
  return m;
}

}  // namespace magloc
