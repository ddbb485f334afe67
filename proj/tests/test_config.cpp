#include <doctest.h>

#include <cmath>

#include "magloc/config.hpp"

using namespace magloc;

TEST_CASE("config round trip preserves every field") {
  RunConfig c = preset_config("ex2b");
  c.beta = 0.07;
  c.seed = 99;
  c.aperture.kind = ApertureSpec::Kind::Cap;
  c.aperture.axis = Vec3(0, 1, 0);
  c.aperture.half_angle = 1.1;
  c.basis = VshBasisSpec{3, 1, 8};
  c.slice = SliceSpec{Vec3(0, 0, 0.1), Vec3(0, 0, 1)};
  c.scenario.anomalies[0].polarization = Cplx(2.0, -0.5) * CMat3::Identity();

  const RunConfig r = parse_config(serialize_config(c));
  CHECK(r.beta == c.beta);
  CHECK(r.seed == c.seed);
  CHECK(r.quadrature_degree == c.quadrature_degree);
  CHECK(r.aperture.kind == c.aperture.kind);
  CHECK(r.aperture.half_angle == c.aperture.half_angle);
  CHECK(r.basis.N1 == 3);
  CHECK(r.basis.N3 == 8);
  REQUIRE(r.slice.has_value());
  CHECK((r.slice->point - c.slice->point).norm() == 0.0);
  REQUIRE(r.scenario.anomalies.size() == c.scenario.anomalies.size());
  CHECK((r.scenario.anomalies[0].polarization - c.scenario.anomalies[0].polarization)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((r.scenario.anomalies[1].position - c.scenario.anomalies[1].position).norm() == 0.0);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_config("[scenario]\nR0 = 7\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nosuch]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("orphan = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[noise]\nmode = sideways\n"), ConfigError);
}

TEST_CASE("invariants are validated at load") {
  RunConfig base = preset_config("ex1a");
  std::string text = serialize_config(base);
  // break the radii ordering
  const std::string bad = text.replace(text.find("R0 = 7"), 6, "R0 = 0.4");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("complex config values parse in all spellings") {
  const std::string text = R"cfg(
[background]
kind = uniform
moment = 1.5-0.25i 2i -3
[anomaly]
position = 0 0.75 0
delta = 0.02
polarization = scalar 2+1i
)cfg";
  const RunConfig c = parse_config(text);
  CHECK(c.scenario.background.moment.x() == Cplx(1.5, -0.25));
  CHECK(c.scenario.background.moment.y() == Cplx(0.0, 2.0));
  CHECK(c.scenario.background.moment.z() == Cplx(-3.0, 0.0));
  CHECK(c.scenario.anomalies[0].polarization(1, 1) == Cplx(2.0, 1.0));
}

TEST_CASE("presets exist, validate, and mirror the experiment layouts") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const RunConfig c = preset_config(name);
    CHECK_NOTHROW(c.validate());
    CHECK(c.scenario.R0 == 7.0);
    CHECK(c.scenario.earth_radius == 1.0);
    CHECK(c.scenario.core_radius == 0.5);
  }
  CHECK(is_preset("ex1a"));
  CHECK_FALSE(is_preset("ex9"));
  CHECK_THROWS_AS(preset_config("ex9"), ConfigError);

  CHECK(preset_config("ex1a").beta == 0.20);
  CHECK(preset_config("ex1b").scenario.anomalies[0].position.norm() ==
        doctest::Approx(0.99));
  CHECK(preset_config("ex2a").scenario.anomalies.size() == 4);

  const RunConfig ex2b = preset_config("ex2b");
  CHECK((ex2b.scenario.anomalies[0].position - ex2b.scenario.anomalies[1].position).norm() ==
        doctest::Approx(0.20));
  const RunConfig close = preset_config("ex2b-close");
  CHECK((close.scenario.anomalies[0].position - close.scenario.anomalies[1].position).norm() ==
        doctest::Approx(0.04));

  // the L-shape chain preserves the extended body's delta^3 volume
  const RunConfig ex3 = preset_config("ex3");
  double vol = 0.0;
  for (const Anomaly& a : ex3.scenario.anomalies) vol += std::pow(a.delta, 3);
  CHECK(vol == doctest::Approx(2.0 * 0.5 * 0.03 * 0.03).epsilon(1e-10));
  for (const Anomaly& a : ex3.scenario.anomalies) {
    CHECK(a.position.norm() > 0.5);
    CHECK(a.position.norm() < 1.0);
    CHECK(a.position.x() == 0.0);  // chain lies in the y-z plane
  }

  CHECK(preset_config("ex4-hemi").aperture.kind == ApertureSpec::Kind::Hemisphere);
  CHECK(preset_config("ex4-quarter").aperture.kind == ApertureSpec::Kind::Quarter);
}

TEST_CASE("checked-in preset files match the built-in definitions") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const std::string path = std::string(MAGLOC_SOURCE_DIR) + "/presets/" + name + ".cfg";
    const RunConfig from_file = load_config(path);
    CHECK(serialize_config(from_file) == serialize_config(preset_config(name)));
  }
}
