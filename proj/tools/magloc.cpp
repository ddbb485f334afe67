// Command-line front end: scenario configuration, pipeline orchestration,
// deterministic file I/O, and report generation.
//
// Exit codes: 0 success, 2 config error, 3 degenerate data,
//             4 ill-conditioned fit, 5 verification failure.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>

#include "magloc/config.hpp"
#include "magloc/pipeline.hpp"
#include "magloc/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace magloc;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::string aperture;
  std::string aperture_mode;
  std::string basis;
  std::string slice;
  double beta = -1.0;
  double grid_h = 0.0;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Run configuration file");
  cmd->add_option("--preset", f.preset, "Bundled scenario preset (ex1a, ex1b, ex2a, ...)");
  cmd->add_option("--out", f.out_dir, "Output directory");
  cmd->add_option("--seed", f.seed, "Noise seed override");
  cmd->add_option("--beta", f.beta, "Noise level override");
  cmd->add_option("--aperture", f.aperture,
                  "full | hemi:AXIS | quarter:AXIS1,AXIS2 | cap:AXIS,ANGLE (AXIS in "
                  "{+x,-x,+y,-y,+z,-z})");
  cmd->add_option("--aperture-mode", f.aperture_mode, "extend | raw");
  cmd->add_option("--basis", f.basis, "Extension basis N1,N2,N3");
  cmd->add_option("--grid", f.grid_h, "Grid spacing override");
  cmd->add_option("--slice", f.slice, "none | x=C | y=C | z=C");
}

Vec3 named_axis(const std::string& t) {
  if (t == "+x") return Vec3(1, 0, 0);
  if (t == "-x") return Vec3(-1, 0, 0);
  if (t == "+y") return Vec3(0, 1, 0);
  if (t == "-y") return Vec3(0, -1, 0);
  if (t == "+z") return Vec3(0, 0, 1);
  if (t == "-z") return Vec3(0, 0, -1);
  throw ConfigError("unknown axis '" + t + "' (use +x, -x, +y, -y, +z, -z)");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.preset.empty() && !f.config_path.empty())
    throw ConfigError("--config and --preset are mutually exclusive");
  if (!f.preset.empty())
    cfg = preset_config(f.preset);
  else if (!f.config_path.empty())
    cfg = load_config(f.config_path);
  else
    throw ConfigError("one of --config or --preset is required");

  if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.beta >= 0.0) cfg.beta = f.beta;
  if (f.grid_h > 0.0) cfg.grid_h = f.grid_h;

  if (!f.aperture.empty()) {
    const std::string& a = f.aperture;
    if (a == "full") {
      cfg.aperture.kind = ApertureSpec::Kind::Full;
    } else if (a.rfind("hemi:", 0) == 0) {
      cfg.aperture.kind = ApertureSpec::Kind::Hemisphere;
      cfg.aperture.axis = named_axis(a.substr(5));
    } else if (a.rfind("quarter:", 0) == 0) {
      const std::string rest = a.substr(8);
      const std::size_t comma = rest.find(',');
      if (comma == std::string::npos) throw ConfigError("quarter aperture needs two axes");
      cfg.aperture.kind = ApertureSpec::Kind::Quarter;
      cfg.aperture.axis = named_axis(rest.substr(0, comma));
      cfg.aperture.axis2 = named_axis(rest.substr(comma + 1));
    } else if (a.rfind("cap:", 0) == 0) {
      const std::string rest = a.substr(4);
      const std::size_t comma = rest.find(',');
      if (comma == std::string::npos) throw ConfigError("cap aperture needs AXIS,ANGLE");
      cfg.aperture.kind = ApertureSpec::Kind::Cap;
      cfg.aperture.axis = named_axis(rest.substr(0, comma));
      cfg.aperture.half_angle = std::stod(rest.substr(comma + 1));
    } else {
      throw ConfigError("unknown aperture '" + a + "'");
    }
  }
  if (!f.aperture_mode.empty()) {
    if (f.aperture_mode == "raw") cfg.aperture_raw = true;
    else if (f.aperture_mode == "extend") cfg.aperture_raw = false;
    else throw ConfigError("unknown aperture mode '" + f.aperture_mode + "'");
  }
  if (!f.basis.empty()) {
    int n1, n2, n3;
    if (std::sscanf(f.basis.c_str(), "%d,%d,%d", &n1, &n2, &n3) != 3)
      throw ConfigError("--basis expects N1,N2,N3");
    cfg.basis = VshBasisSpec{n1, n2, n3};
  }
  if (!f.slice.empty()) {
    if (f.slice == "none") {
      cfg.slice.reset();
    } else if (f.slice.size() >= 3 && f.slice[1] == '=') {
      const double c = std::stod(f.slice.substr(2));
      SliceSpec s;
      if (f.slice[0] == 'x') s.normal = Vec3(1, 0, 0);
      else if (f.slice[0] == 'y') s.normal = Vec3(0, 1, 0);
      else if (f.slice[0] == 'z') s.normal = Vec3(0, 0, 1);
      else throw ConfigError("slice axis must be x, y, or z");
      s.point = c * s.normal;
      cfg.slice = s;
    } else {
      throw ConfigError("--slice expects none or x=C / y=C / z=C");
    }
  }
  cfg.validate();
  return cfg;
}

void print_warnings(const RunConfig& cfg) {
  for (const std::string& w : cfg.scenario.warnings()) std::cerr << "warning: " << w << "\n";
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json cvec_json(const CVecX& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    arr.push_back(json::array({v(i).real(), v(i).imag()}));
  return arr;
}

std::string round3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

json make_report(const RunConfig& cfg, const LocateResult& res) {
  json r;
  r["config"] = serialize_config(cfg);
  CVecX p(3), q(5);
  for (int i = 0; i < 3; ++i) p(i) = res.projections.P(i);
  for (int i = 0; i < 5; ++i) q(i) = res.projections.Q(i);
  r["projections"]["P"] = cvec_json(p);
  r["projections"]["Q"] = cvec_json(q);
  r["projections"]["R0"] = res.projections.R0;

  json peaks = json::array();
  for (std::size_t i = 0; i < res.peaks.size(); ++i) {
    json pk;
    pk["grid_position"] = vec3_json(res.peaks[i].position);
    pk["normalized_value"] = res.peaks[i].normalized_value;
    pk["saturated"] = res.peaks[i].saturated;
    pk["refined_position"] = vec3_json(res.refined[i].position);
    pk["refined_clamped"] = res.refined[i].clamped;
    pk["refined_table"] = round3(res.refined[i].position.x()) + ", " +
                          round3(res.refined[i].position.y()) + ", " +
                          round3(res.refined[i].position.z());
    // Position error against the nearest ground-truth anomaly.
    double best = std::numeric_limits<double>::infinity();
    for (const Anomaly& a : cfg.scenario.anomalies)
      best = std::min(best, (a.position - res.refined[i].position).norm());
    if (std::isfinite(best)) pk["error_vs_truth"] = best;
    peaks.push_back(pk);
  }
  r["peaks"] = peaks;

  if (res.fit) {
    r["fit"]["relative_residual"] = res.fit->relative_residual;
    r["fit"]["condition_indicator"] = res.fit->condition_indicator;
    r["fit"]["truncated_count"] = res.fit->truncated_count;
  }
  r["work"]["grid_points"] = res.grid.grid.size();
  r["work"]["peak_count"] = res.peaks.size();
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f << text;
}

int cmd_synth(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  print_warnings(cfg);
  fs::create_directories(cfg.output_dir);
  Measurement data = run_synth(cfg);
  if (cfg.aperture.kind != ApertureSpec::Kind::Full)
    data = restrict_measurement(data, cfg.aperture);
  const std::string path = cfg.output_dir + "/measurement.csv";
  write_measurement_csv(data, path);
  write_text(cfg.output_dir + "/run.cfg", serialize_config(cfg));
  std::cout << "wrote " << path << " (" << data.size() << " samples, beta = " << cfg.beta
            << ", seed = " << cfg.seed << ")\n";
  return 0;
}

int cmd_locate(const CommonFlags& flags, const std::string& data_path) {
  const RunConfig cfg = resolve_config(flags);
  print_warnings(cfg);
  fs::create_directories(cfg.output_dir);
  const auto t0 = std::chrono::steady_clock::now();

  Measurement data = read_measurement_csv(data_path);
  LocateResult res;
  if (data.has_weights()) {
    res = run_locate(data, cfg);
  } else if (cfg.aperture_raw) {
    const QuadratureRule rule = build_quadrature(cfg.quadrature_degree);
    res = run_locate(reattach_weights(data, rule), cfg);
  } else {
    FitReport fit;
    const Measurement extended = run_extend(data, cfg, &fit);
    res = run_locate(extended, cfg);
    res.fit = fit;
  }

  write_indicator_csv(res.grid, cfg.output_dir + "/indicator.csv");
  const json report = make_report(cfg, res);
  write_text(cfg.output_dir + "/report.json", report.dump(2) + "\n");

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "peaks:\n";
  for (std::size_t i = 0; i < res.peaks.size(); ++i) {
    const Vec3& p = res.refined[i].position;
    std::cout << "  (" << round3(p.x()) << ", " << round3(p.y()) << ", " << round3(p.z())
              << ")  I_norm = " << round3(res.peaks[i].normalized_value)
              << (res.peaks[i].saturated ? "  [saturated]" : "") << "\n";
  }
  std::cout << "wrote " << cfg.output_dir << "/indicator.csv and report.json in "
            << round3(secs) << " s\n";
  return 0;
}

int cmd_extend(const CommonFlags& flags, const std::string& data_path) {
  const RunConfig cfg = resolve_config(flags);
  fs::create_directories(cfg.output_dir);
  const Measurement partial = read_measurement_csv(data_path);

  FitReport fit;
  const VshCoefficients coeffs =
      fit_extension(partial, cfg.basis, cfg.fit_floor, cfg.fit_area_weighted, &fit);
  const QuadratureRule rule = build_quadrature(cfg.quadrature_degree);
  Measurement extended = evaluate_extension(coeffs, rule, partial.radius);
  extended.metadata["extended_from"] = std::to_string(partial.size()) + " partial samples";

  write_measurement_csv(extended, cfg.output_dir + "/extended.csv");
  write_coefficients_csv(coeffs, cfg.output_dir + "/coefficients.csv");
  std::cout << "fit: relative residual = " << fit.relative_residual
            << ", condition indicator = " << fit.condition_indicator << ", truncated "
            << fit.truncated_count << " singular values\n";
  std::cout << "wrote " << cfg.output_dir << "/extended.csv and coefficients.csv\n";
  return 0;
}

int cmd_verify(const CommonFlags& flags, bool unit_qz_scale, int degree) {
  VerifyOptions opt;
  opt.quad_degree = degree;
  if (unit_qz_scale) opt.qz_scale_override = 1.0;
  if (!flags.preset.empty() || !flags.config_path.empty()) {
    const RunConfig cfg = resolve_config(flags);
    opt.quad_degree = std::max(opt.quad_degree, cfg.quadrature_degree >= 12 ? 16 : opt.quad_degree);
  }
  const auto results = run_verification(opt);
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " -- " << r.detail << "\n";
    if (!r.pass) ++failures;
  }
  if (failures > 0) {
    std::cout << failures << " verification check(s) failed\n";
    return 5;
  }
  std::cout << "all " << results.size() << " verification checks passed\n";
  return 0;
}

int cmd_report(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  print_warnings(cfg);
  fs::create_directories(cfg.output_dir);
  const auto t0 = std::chrono::steady_clock::now();

  const Measurement data = run_synth(cfg);
  write_measurement_csv(data, cfg.output_dir + "/measurement.csv");
  LocateResult res;
  if (cfg.aperture.kind == ApertureSpec::Kind::Full) {
    res = run_locate(data, cfg);
  } else {
    const Measurement partial = restrict_measurement(data, cfg.aperture);
    write_measurement_csv(partial, cfg.output_dir + "/partial.csv");
    if (cfg.aperture_raw) {
      const QuadratureRule rule = build_quadrature(cfg.quadrature_degree);
      res = run_locate(reattach_weights(partial, rule), cfg);
    } else {
      FitReport fit;
      const Measurement extended = run_extend(partial, cfg, &fit);
      write_measurement_csv(extended, cfg.output_dir + "/extended.csv");
      res = run_locate(extended, cfg);
      res.fit = fit;
    }
  }
  write_indicator_csv(res.grid, cfg.output_dir + "/indicator.csv");
  write_text(cfg.output_dir + "/run.cfg", serialize_config(cfg));
  const json report = make_report(cfg, res);
  write_text(cfg.output_dir + "/report.json", report.dump(2) + "\n");

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "report written to " << cfg.output_dir << " (" << res.peaks.size()
            << " peak(s)) in " << round3(secs) << " s\n";
  for (std::size_t i = 0; i < res.peaks.size(); ++i) {
    const Vec3& p = res.refined[i].position;
    std::cout << "  peak " << i << ": (" << round3(p.x()) << ", " << round3(p.y()) << ", "
              << round3(p.z()) << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magloc: locate small magnetized anomalies from field-difference data"};
  app.require_subcommand(1);

  CommonFlags synth_flags, locate_flags, extend_flags, verify_flags, report_flags;
  std::string locate_data, extend_data;
  bool unit_qz = false;
  int verify_degree = 16;

  CLI::App* synth = app.add_subcommand("synth", "Synthesize measurement data");
  add_common(synth, synth_flags);

  CLI::App* locate = app.add_subcommand("locate", "Run the imaging pipeline on a data file");
  add_common(locate, locate_flags);
  locate->add_option("data", locate_data, "Measurement CSV")->required();

  CLI::App* extend = app.add_subcommand("extend", "Extend partial-aperture data to the sphere");
  add_common(extend, extend_flags);
  extend->add_option("data", extend_data, "Partial measurement CSV")->required();

  CLI::App* verify = app.add_subcommand("verify", "Run the numerical invariant suite");
  add_common(verify, verify_flags);
  verify->add_flag("--debug-unit-qz-scale", unit_qz,
                   "Negative control: evaluate Q_z without its projection scale");
  verify->add_option("--degree", verify_degree, "Quadrature degree for the checks");

  CLI::App* report = app.add_subcommand("report", "Full pipeline run with all artifacts");
  add_common(report, report_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // flag misuse is a configuration error
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_flags);
    if (locate->parsed()) return cmd_locate(locate_flags, locate_data);
    if (extend->parsed()) return cmd_extend(extend_flags, extend_data);
    if (verify->parsed()) return cmd_verify(verify_flags, unit_qz, verify_degree);
    if (report->parsed()) return cmd_report(report_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateDataError& e) {
    std::cerr << "degenerate data: " << e.what() << "\n";
    return 3;
  } catch (const IllConditionedFitError& e) {
    std::cerr << "ill-conditioned fit (condition indicator " << e.condition_indicator
              << "): " << e.what() << "\n";
    return 4;
  } catch (const DegenerateSystemError& e) {
    std::cerr << "ill-conditioned fit: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
