#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace magloc {

using Cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;
using CVec5 = Eigen::Matrix<Cplx, 5, 1>;
using CMat35 = Eigen::Matrix<Cplx, 3, 5>;
using CMat53 = Eigen::Matrix<Cplx, 5, 3>;
using CMatX = Eigen::MatrixXcd;
using CVecX = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IndexDomainError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

class NumericDegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Measurement lacks quadrature weights where an integral is required.
class NeedsQuadratureError : public Error {
 public:
  using Error::Error;
};

/// No anomaly signal in the data (||P|| == 0).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class EmptyApertureError : public Error {
 public:
  using Error::Error;
};

class DivergenceDomainError : public Error {
 public:
  using Error::Error;
};

class IllConditionedFitError : public Error {
 public:
  explicit IllConditionedFitError(const std::string& what, double condition)
      : Error(what), condition_indicator(condition) {}
  double condition_indicator = 0.0;
};

class DegenerateSystemError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace magloc
