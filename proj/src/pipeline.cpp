#include "magloc/pipeline.hpp"

namespace magloc {

Measurement run_synth(const RunConfig& config) {
  config.validate();
  const QuadratureRule rule = build_quadrature(config.quadrature_degree);
  Measurement clean = synthesize(config.scenario, rule);
  clean.metadata["beta"] = std::to_string(config.beta);
  clean.metadata["seed"] = std::to_string(config.seed);
  if (config.beta == 0.0) return clean;
  return corrupt(clean, config.beta, config.seed, config.noise_mode);
}

Measurement apply_aperture(const Measurement& meas, const RunConfig& config) {
  if (config.aperture.kind == ApertureSpec::Kind::Full) return meas;
  return restrict_measurement(meas, config.aperture);
}

Measurement run_extend(const Measurement& partial, const RunConfig& config, FitReport* report) {
  const VshCoefficients coeffs =
      fit_extension(partial, config.basis, config.fit_floor, config.fit_area_weighted, report);
  const QuadratureRule rule = build_quadrature(config.quadrature_degree);
  return evaluate_extension(coeffs, rule, partial.radius);
}

LocateResult run_locate(const Measurement& meas, const RunConfig& config) {
  LocateResult out;
  out.projections = compute_projections(meas);

  // For raw partial data the transfer blocks integrate over the covered
  // aperture only, mirroring the restricted P and Q integrals.
  const TransferEvaluator te(meas.directions, *meas.weights);

  const ShellGrid grid =
      build_shell_grid(config.grid_inner, config.grid_outer, config.grid_h, config.slice);
  out.grid = sweep(grid, out.projections, te);
  out.peaks = extract_peaks(out.grid, config.peak_threshold, config.peak_min_separation);
  out.refined.reserve(out.peaks.size());
  for (const Peak& p : out.peaks) out.refined.push_back(refine_peak(out.grid, p, out.projections, te));
  return out;
}

LocateResult run_pipeline(const RunConfig& config) {
  const Measurement data = run_synth(config);
  if (config.aperture.kind == ApertureSpec::Kind::Full) return run_locate(data, config);

  const Measurement partial = restrict_measurement(data, config.aperture);
  if (config.aperture_raw) {
    const QuadratureRule rule = build_quadrature(config.quadrature_degree);
    return run_locate(reattach_weights(partial, rule), config);
  }
  FitReport report;
  const Measurement extended = run_extend(partial, config, &report);
  LocateResult out = run_locate(extended, config);
  out.fit = report;
  return out;
}

Vec3 best_position(const LocateResult& result) {
  if (result.refined.empty()) {
    // No peak above threshold: fall back to the raw grid argmax.
    return result.grid.grid.points[result.grid.argmax];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.refined.size(); ++i)
    if (result.refined[i].value > result.refined[best].value) best = i;
  return result.refined[best].position;
}

}  // namespace magloc
