#pragma once

#include <span>
#include <vector>

#include "qpmfs/types.hpp"

namespace qpmfs::special {

/// Spherical Bessel functions j_0(x) .. j_lmax(x) for x >= 0, written to
/// out[0..lmax]. Uses upward recurrence for x > lmax and Miller's backward
/// recurrence (normalized by sum (2l+1) j_l^2 = 1) otherwise.
void spherical_bessel_j(int lmax, double x, std::span<double> out);

/// Packed index of (l, m), |m| <= l.
constexpr int lm_index(int l, int m) { return l * l + l + m; }
constexpr int lm_count(int lmax) { return (lmax + 1) * (lmax + 1); }

/// Orthonormal complex spherical harmonics with Condon-Shortley phase,
/// packed by lm_index. When derivatives are requested, dtheta holds
/// dY/dtheta and dphi_sin holds (1/sin theta) dY/dphi; both are regular at
/// the poles.
struct Harmonics {
  std::vector<cplx> y;
  std::vector<cplx> dtheta;
  std::vector<cplx> dphi_sin;
};
void spherical_harmonics(int lmax, double theta, double phi, Harmonics& out,
                         bool derivatives);

/// Error function of a complex argument. Taylor series near the origin,
/// Laplace continued fraction for erfc further out.
cplx erf(cplx z);

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace qpmfs::special
