#include "qpmfs/waves.hpp"

#include <cmath>

namespace qpmfs {

using special::lm_index;

void spherical_hankel(int lmax, double x, std::vector<cplx>& out) {
  if (!(x > 0.0)) throw InputError("spherical_hankel: argument must be positive");
  std::vector<double> j(lmax + 1);
  special::spherical_bessel_j(lmax, x, j);
  out.resize(lmax + 1);
  double y0 = -std::cos(x) / x;
  double y1 = -std::cos(x) / (x * x) - std::sin(x) / x;
  out[0] = {j[0], y0};
  if (lmax >= 1) out[1] = {j[1], y1};
  for (int l = 2; l <= lmax; ++l) {
    const double y2 = (2 * l - 1) / x * y1 - y0;
    y0 = y1;
    y1 = y2;
    out[l] = {j[l], y2};
  }
}

namespace {

void angles(const Vec3& x, double& r, double& theta, double& phi) {
  r = x.norm();
  theta = r > 0.0 ? std::acos(std::clamp(x.z() / r, -1.0, 1.0)) : 0.0;
  phi = std::atan2(x.y(), x.x());
}

}  // namespace

void RegularWaves::eval(const Vec3& x, bool gradients) {
  double r, theta, phi;
  angles(x, r, theta, phi);
  const double kr = k_ * r;
  j_.resize(L_ + 2);
  special::spherical_bessel_j(L_ + 1, kr, j_);
  special::spherical_harmonics(L_, theta, phi, h_, gradients);
  const int n = count();
  value.resize(n);
  if (gradients) grad.resize(n);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const Vec3 rhat(st * cp, st * sp, ct);
  const Vec3 that(ct * cp, ct * sp, -st);
  const Vec3 phat(-sp, cp, 0.0);
  for (int l = 0; l <= L_; ++l) {
    const double jl = j_[l];
    // j_l', and j_l(x)/x, both regular at x = 0
    const double jm = l > 0 ? j_[l - 1] : 0.0;
    const double djl = (l * jm - (l + 1) * j_[l + 1]) / (2 * l + 1);
    const double jx = (jm + j_[l + 1]) / (2 * l + 1);
    for (int m = -l; m <= l; ++m) {
      const int i = lm_index(l, m);
      value[i] = jl * h_.y[i];
      if (gradients) {
        grad[i] = (k_ * djl * h_.y[i]) * rhat.cast<cplx>() +
                  (k_ * jx) * (h_.dtheta[i] * that.cast<cplx>() + h_.dphi_sin[i] * phat.cast<cplx>());
      }
    }
  }
}

void OutgoingFactors::eval(const Vec3& y) {
  double r, theta, phi;
  angles(y, r, theta, phi);
  spherical_hankel(L_, k_ * r, hl_);
  special::spherical_harmonics(L_, theta, phi, h_, false);
  value.resize(special::lm_count(L_));
  for (int l = 0; l <= L_; ++l)
    for (int m = -l; m <= l; ++m) {
      const int i = lm_index(l, m);
      value[i] = hl_[l] * std::conj(h_.y[i]);
    }
}

}  // namespace qpmfs
