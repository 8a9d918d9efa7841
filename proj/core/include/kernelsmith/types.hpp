#ifndef KERNELSMITH_TYPES_HPP
#define KERNELSMITH_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace kernelsmith {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline const Complex kImagUnit{0.0, 1.0};

inline constexpr const char* kVersion = "0.1.0";

// Interior evaluation keeps this many local grid spacings away from the
// boundary; the periodic-trapezoid Cauchy quadrature loses digits closer in.
inline constexpr double kGuardSpacings = 5.0;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid curve configuration (overlaps, bad orientation, r <= 2, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Evaluation point violates a guard distance (too close to the boundary,
// to a kernel diagonal, or to a critical point).
class GuardError : public Error {
 public:
  using Error::Error;
};

// A dense collocation system was singular to working precision.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Argument-principle zero count disagrees with the expected count.
class CountMismatchError : public Error {
 public:
  using Error::Error;
};

// No polynomial relation below the bidegree cap.
class NoRelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace kernelsmith

#endif
