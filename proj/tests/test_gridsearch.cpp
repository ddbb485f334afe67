#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "magloc/forward.hpp"
#include "magloc/gridsearch.hpp"
#include "oracles.hpp"

using namespace magloc;

namespace {

struct PipelineFixture {
  QuadratureRule rule = build_quadrature(16);
  Scenario scenario;
  Measurement meas;
  ProjectionData pd;

  explicit PipelineFixture(const Vec3& z1 = Vec3(0.7, 0.2, 0.1)) {
    scenario.anomalies = {Anomaly{z1, 0.02, CMat3::Identity()}};
    scenario.background.kind = BackgroundKind::AxialDipole;
    scenario.background.moment = CVec3(0, 0, 1);
    meas = synthesize(scenario, rule);
    pd = compute_projections(meas);
  }
};

}  // namespace

TEST_CASE("shell grid: containment, scaling, slices, errors") {
  const ShellGrid g = build_shell_grid(0.5, 1.0, 0.5);
  CHECK(g.size() > 0);
  for (const Vec3& p : g.points) {
    CHECK(p.norm() >= 0.5 - 1e-12);
    CHECK(p.norm() <= 1.0 + 1e-12);
  }

  const ShellGrid coarse = build_shell_grid(0.5, 1.0, 0.1);
  const ShellGrid fine = build_shell_grid(0.5, 1.0, 0.05);
  const double ratio = static_cast<double>(fine.size()) / coarse.size();
  CHECK(ratio == doctest::Approx(8.0).epsilon(0.2));

  const ShellGrid slice = build_shell_grid(0.5, 1.0, 0.05, SliceSpec{Vec3::Zero(), Vec3(0, 0, 1)});
  for (const Vec3& p : slice.points) CHECK(std::abs(p.z()) < 1e-12);

  CHECK_THROWS_AS(build_shell_grid(1.0, 0.5, 0.1), ConfigError);
  CHECK_THROWS_AS(build_shell_grid(0.5, 1.0, 0.9), ConfigError);
}

TEST_CASE("sweep normalizes to 1 and finds the anomaly cell") {
  const PipelineFixture fx;
  const TransferEvaluator te(fx.rule);
  const ShellGrid grid = build_shell_grid(0.5, 1.0, 0.02);
  const IndicatorGrid ig = sweep(grid, fx.pd, te);

  double mx = 0.0;
  for (double v : ig.normalized) mx = std::max(mx, v);
  CHECK(mx == 1.0);

  const Vec3 argmax = grid.points[ig.argmax];
  CHECK((argmax - fx.scenario.anomalies[0].position).norm() <
        std::sqrt(3.0) * grid.spacing + 1e-12);
}

TEST_CASE("sweep output is identical at any worker count") {
  const PipelineFixture fx;
  const TransferEvaluator te(fx.rule);
  const ShellGrid grid = build_shell_grid(0.5, 1.0, 0.05);
  const IndicatorGrid one = sweep(grid, fx.pd, te, 1);
  const IndicatorGrid four = sweep(grid, fx.pd, te, 4);
  const IndicatorGrid seven = sweep(grid, fx.pd, te, 7);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(one.values[i] == four.values[i]);
    CHECK(one.values[i] == seven.values[i]);
  }
}

TEST_CASE("extract_peaks on a hand-crafted field") {
  // Synthetic two-bump field over a slice grid exercises the extraction
  // machinery independently of the imaging landscape.
  ShellGrid grid = build_shell_grid(0.5, 1.0, 0.02, SliceSpec{Vec3::Zero(), Vec3(0, 0, 1)});
  IndicatorGrid ig;
  ig.grid = grid;
  const Vec3 a(0.7, 0.1, 0.0), b(-0.2, 0.75, 0.0);
  ig.values.resize(grid.size());
  ig.saturated.assign(grid.size(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double da = (grid.points[i] - a).norm();
    const double db = (grid.points[i] - b).norm();
    ig.values[i] = std::exp(-40.0 * da * da) + 0.8 * std::exp(-40.0 * db * db);
  }
  ig.argmax = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (ig.values[i] > ig.values[ig.argmax]) ig.argmax = i;
  ig.normalized.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    ig.normalized[i] = ig.values[i] / ig.values[ig.argmax];

  const auto peaks = extract_peaks(ig, 0.5, 0.05);
  REQUIRE(peaks.size() == 2);
  CHECK((peaks[0].position - a).norm() < 0.03);
  CHECK((peaks[1].position - b).norm() < 0.03);
  CHECK(peaks[0].normalized_value == 1.0);

  // raising the threshold never increases the count
  std::size_t prev = peaks.size();
  for (double thr : {0.6, 0.85, 0.95, 0.999}) {
    const auto p = extract_peaks(ig, thr, 0.05);
    CHECK(p.size() <= prev);
    prev = p.size();
  }
  CHECK(extract_peaks(ig, 0.999, 0.05).size() >= 1);  // the maximum always qualifies

  // wide dedup radius merges the two bumps
  CHECK(extract_peaks(ig, 0.5, 2.0).size() == 1);

  CHECK_THROWS_AS(extract_peaks(ig, 0.0, 0.05), ConfigError);
}

TEST_CASE("single clean anomaly yields exactly one peak above half height") {
  const PipelineFixture fx;
  const TransferEvaluator te(fx.rule);
  const IndicatorGrid ig = sweep(build_shell_grid(0.5, 1.0, 0.02), fx.pd, te);
  const auto peaks = extract_peaks(ig, 0.5, 0.05);
  REQUIRE(peaks.size() == 1);
  CHECK((peaks[0].position - fx.scenario.anomalies[0].position).norm() <
        std::sqrt(3.0) * 0.02 + 1e-12);
}

TEST_CASE("refine_peak sharpens the estimate and is nearly idempotent") {
  const PipelineFixture fx(Vec3(0.705, 0.195, 0.105));  // off-lattice truth
  const TransferEvaluator te(fx.rule);
  const IndicatorGrid ig = sweep(build_shell_grid(0.5, 1.0, 0.03), fx.pd, te);
  const auto peaks = extract_peaks(ig, 0.5, 0.05);
  REQUIRE(peaks.size() == 1);

  const RefinedPeak r1 = refine_peak(ig, peaks[0], fx.pd, te);
  CHECK((r1.position - fx.scenario.anomalies[0].position).norm() < 0.03 / 3.0 + 1e-12);

  Peak again;
  again.position = r1.position;
  again.normalized_value = peaks[0].normalized_value;
  IndicatorGrid finer = ig;
  finer.grid.spacing = 0.01;
  const RefinedPeak r2 = refine_peak(finer, again, fx.pd, te);
  CHECK((r2.position - r1.position).norm() <= 0.03 / 9.0 * std::sqrt(3.0) + 1e-12);
}

TEST_CASE("refinement at the shell boundary clamps and flags") {
  const PipelineFixture fx(Vec3(0.985, 0.0, 0.0));
  const TransferEvaluator te(fx.rule);
  const IndicatorGrid ig = sweep(build_shell_grid(0.5, 1.0, 0.02), fx.pd, te);
  const auto peaks = extract_peaks(ig, 0.5, 0.05);
  REQUIRE(peaks.size() >= 1);
  const RefinedPeak r = refine_peak(ig, peaks[0], fx.pd, te);
  CHECK(r.clamped);
  CHECK(r.position.norm() <= 1.0 + 1e-12);
}

TEST_CASE("indicator CSV export carries the slice header and all columns") {
  const PipelineFixture fx;
  const TransferEvaluator te(fx.rule);
  const ShellGrid grid =
      build_shell_grid(0.5, 1.0, 0.1, SliceSpec{Vec3(0, 0, 0.1), Vec3(0, 0, 1)});
  const IndicatorGrid ig = sweep(grid, fx.pd, te);
  const std::string path = "test_indicator.csv";
  write_indicator_csv(ig, path);

  std::ifstream f(path);
  std::string line;
  bool saw_slice = false, saw_header = false;
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    if (line.rfind("# slice_normal", 0) == 0) saw_slice = true;
    if (line == "x,y,z,I_raw,I_norm,saturated") saw_header = true;
    if (!line.empty() && line[0] != '#' && line[0] != 'x') ++rows;
  }
  CHECK(saw_slice);
  CHECK(saw_header);
  CHECK(rows == grid.size());
  std::remove(path.c_str());
}

TEST_CASE("sweep values inherit measurement invariances bitwise") {
  const PipelineFixture fx;
  const TransferEvaluator te(fx.rule);
  const ShellGrid grid = build_shell_grid(0.5, 1.0, 0.05);

  Measurement scaled = fx.meas;
  for (auto& v : scaled.values) v *= Cplx(0.0, 2.5);  // phase and scale together
  const ProjectionData pd2 = compute_projections(scaled);

  const IndicatorGrid a = sweep(grid, fx.pd, te);
  const IndicatorGrid b = sweep(grid, pd2, te);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-12 * a.values[i]);
    CHECK(std::abs(a.normalized[i] - b.normalized[i]) <= 1e-12);
  }
}
