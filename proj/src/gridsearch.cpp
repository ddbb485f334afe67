#include "magloc/gridsearch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

namespace magloc {

namespace {

// Orthonormal in-plane axes for a slice, deterministic in the normal.
void plane_axes(const Vec3& normal, Vec3& u, Vec3& v) {
  const Vec3 n = normal.normalized();
  const Vec3 seed = std::abs(n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  u = seed.cross(n).normalized();
  v = n.cross(u);
}

}  // namespace

ShellGrid build_shell_grid(double inner, double outer, double h, std::optional<SliceSpec> slice) {
  if (!(0.0 < inner && inner < outer)) throw ConfigError("grid requires 0 < inner < outer");
  if (!(0.0 < h && h <= outer - inner))
    throw ConfigError("grid spacing must be in (0, outer-inner]");
  ShellGrid g;
  g.inner_radius = inner;
  g.outer_radius = outer;
  g.spacing = h;
  g.slice = slice;

  const int nmax = static_cast<int>(std::floor(outer / h + 1e-9));
  if (slice) {
    Vec3 u, v;
    plane_axes(slice->normal, u, v);
    for (int i = -nmax; i <= nmax; ++i) {
      for (int j = -nmax; j <= nmax; ++j) {
        const Vec3 p = slice->point + i * h * u + j * h * v;
        const double r = p.norm();
        if (r >= inner - 1e-12 && r <= outer + 1e-12) {
          g.points.push_back(p);
          g.indices.push_back({i, j, 0});
        }
      }
    }
  } else {
    for (int i = -nmax; i <= nmax; ++i) {
      for (int j = -nmax; j <= nmax; ++j) {
        for (int k = -nmax; k <= nmax; ++k) {
          const Vec3 p(i * h, j * h, k * h);
          const double r = p.norm();
          if (r >= inner - 1e-12 && r <= outer + 1e-12) {
            g.points.push_back(p);
            g.indices.push_back({i, j, k});
          }
        }
      }
    }
  }
  if (g.points.empty()) throw ConfigError("shell grid is empty");
  return g;
}

IndicatorGrid sweep(const ShellGrid& grid, const ProjectionData& pd, const TransferEvaluator& te,
                    int threads) {
  if (pd.P.norm() == 0.0) throw DegenerateDataError("||P|| = 0: nothing to sweep");
  IndicatorGrid ig;
  ig.grid = grid;
  const std::size_t n = grid.size();
  ig.values.resize(n);
  ig.normalized.resize(n);
  ig.saturated.assign(n, false);

  int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  nthreads = std::min<std::size_t>(nthreads, n);

  // Results land at their grid index: identical output at any worker count.
  const auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const IndicatorValue v = indicator(grid.points[i], pd, te);
      ig.values[i] = v.value;
      ig.saturated[i] = v.saturated;
    }
  };
  if (nthreads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  std::size_t arg = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (ig.values[i] > ig.values[arg]) arg = i;
  ig.argmax = arg;
  const double mx = ig.values[arg];
  for (std::size_t i = 0; i < n; ++i) ig.normalized[i] = ig.values[i] / mx;
  return ig;
}

std::vector<Peak> extract_peaks(const IndicatorGrid& ig, double threshold, double min_separation) {
  if (!(threshold > 0.0)) throw ConfigError("peak threshold must be positive");
  const bool slice_mode = ig.grid.slice.has_value();

  std::map<std::array<int, 3>, std::size_t> by_index;
  for (std::size_t i = 0; i < ig.grid.size(); ++i) by_index[ig.grid.indices[i]] = i;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < ig.grid.size(); ++i) {
    if (ig.normalized[i] < threshold) continue;
    const auto [a, b, c] = ig.grid.indices[i];
    bool ismax = true;
    for (int da = -1; da <= 1 && ismax; ++da) {
      for (int db = -1; db <= 1 && ismax; ++db) {
        for (int dc = (slice_mode ? 0 : -1); dc <= (slice_mode ? 0 : 1) && ismax; ++dc) {
          if (da == 0 && db == 0 && dc == 0) continue;
          const auto it = by_index.find({a + da, b + db, c + dc});
          if (it != by_index.end() && ig.values[it->second] > ig.values[i]) ismax = false;
        }
      }
    }
    if (ismax) candidates.push_back(i);
  }

  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) { return ig.values[a] > ig.values[b]; });

  std::vector<Peak> peaks;
  for (std::size_t i : candidates) {
    bool keep = true;
    for (const Peak& p : peaks) {
      if ((p.position - ig.grid.points[i]).norm() < min_separation) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    Peak p;
    p.position = ig.grid.points[i];
    p.normalized_value = ig.normalized[i];
    p.saturated = ig.saturated[i];
    double nearest_higher = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ig.grid.size(); ++j)
      if (ig.values[j] > ig.values[i])
        nearest_higher = std::min(nearest_higher, (ig.grid.points[j] - p.position).norm());
    p.support_radius = std::isfinite(nearest_higher) ? nearest_higher
                                                     : ig.grid.outer_radius - ig.grid.inner_radius;
    peaks.push_back(p);
  }
  return peaks;
}

RefinedPeak refine_peak(const IndicatorGrid& ig, const Peak& peak, const ProjectionData& pd,
                        const TransferEvaluator& te) {
  const double h = ig.grid.spacing;
  const double fine = h / 3.0;
  const bool slice_mode = ig.grid.slice.has_value();

  Vec3 u(1, 0, 0), v(0, 1, 0), w(0, 0, 1);
  if (slice_mode) {
    plane_axes(ig.grid.slice->normal, u, v);
    w = Vec3::Zero();
  }

  RefinedPeak out;
  out.position = peak.position;
  out.value = -1.0;
  bool any_outside = false;
  const int kr = slice_mode ? 0 : 3;
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      for (int k = -kr; k <= kr; ++k) {
        const Vec3 p = peak.position + fine * (i * u + j * v + k * w);
        const double r = p.norm();
        if (r < ig.grid.inner_radius || r > ig.grid.outer_radius) {
          any_outside = true;
          continue;
        }
        const IndicatorValue val = indicator(p, pd, te);
        if (val.value > out.value) {
          out.value = val.value;
          out.position = p;
        }
      }
    }
  }
  out.clamped = any_outside;
  return out;
}

void write_indicator_csv(const IndicatorGrid& ig, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  char buf[200];
  f << "# magloc indicator grid v1\n";
  std::snprintf(buf, sizeof(buf), "# shell = %.17g %.17g", ig.grid.inner_radius,
                ig.grid.outer_radius);
  f << buf << "\n";
  std::snprintf(buf, sizeof(buf), "# spacing = %.17g", ig.grid.spacing);
  f << buf << "\n";
  if (ig.grid.slice) {
    const auto& s = *ig.grid.slice;
    std::snprintf(buf, sizeof(buf), "# slice_point = %.17g %.17g %.17g", s.point.x(), s.point.y(),
                  s.point.z());
    f << buf << "\n";
    std::snprintf(buf, sizeof(buf), "# slice_normal = %.17g %.17g %.17g", s.normal.x(),
                  s.normal.y(), s.normal.z());
    f << buf << "\n";
  }
  f << "x,y,z,I_raw,I_norm,saturated\n";
  for (std::size_t i = 0; i < ig.grid.size(); ++i) {
    const Vec3& p = ig.grid.points[i];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%d", p.x(), p.y(), p.z(),
                  ig.values[i], ig.normalized[i], ig.saturated[i] ? 1 : 0);
    f << buf << '\n';
  }
}

}  // namespace magloc
