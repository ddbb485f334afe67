#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "magloc/sphharm.hpp"
#include "magloc/types.hpp"

namespace magloc {

/// Field-difference samples H~ on (a subset of) the measurement sphere.
/// weights are present exactly when the directions form a quadrature rule
/// covering the full sphere (or, for opt-in raw partial processing, the
/// covered portion of one).
struct Measurement {
  std::vector<Vec3> directions;          // unit vectors
  double radius = 0.0;                   // measurement sphere radius R0
  std::vector<CVec3> values;             // H~(R0 * direction)
  std::optional<std::vector<double>> weights;
  std::map<std::string, std::string> metadata;  // echoed into the CSV sidecar

  std::size_t size() const { return directions.size(); }
  bool has_weights() const { return weights.has_value(); }
  void validate() const;  // throws ShapeError on inconsistent lengths
};

/// Measurement sampled on the nodes of a rule, with its weights attached.
Measurement measurement_on_rule(const QuadratureRule& rule, double radius);

/// CSV format:
///   # magloc measurement v1
///   # radius = <r>
///   # key = value ... (metadata)
///   dir_x,dir_y,dir_z,re_hx,im_hx,re_hy,im_hy,re_hz,im_hz,weight
/// The weight column is left blank when weights are absent.
void write_measurement_csv(const Measurement& meas, const std::string& path);
Measurement read_measurement_csv(const std::string& path);

}  // namespace magloc
