#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qpmfs {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// A point (or direction) in the rho-z half plane that generates a body of
/// revolution about the z axis.
struct PlanePoint {
  double rho = 0.0;
  double z = 0.0;
};

/// Point of the half plane rotated to azimuth phi.
inline Vec3 rotate(PlanePoint p, double phi) {
  return {p.rho * std::cos(phi), p.rho * std::sin(phi), p.z};
}

/// Raised for invalid inputs detected by any module.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (SVD, GMRES, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BcKind { neumann, transmission };

}  // namespace qpmfs
