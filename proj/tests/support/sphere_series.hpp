#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace qpmfs::testing {

// Scattered field of a plane wave e^{ik d.x} off a sound-hard sphere of
// radius a centered at the origin, by separation of variables.
inline std::complex<double> hard_sphere_scattered(double k, double a, const Eigen::Vector3d& d,
                                                  const Eigen::Vector3d& x, int lmax = 60) {
  const double r = x.norm();
  const double cosg = d.normalized().dot(x) / r;
  const double ka = k * a, kr = k * r;
  std::complex<double> sum = 0.0;
  std::complex<double> il = 1.0;
  for (int l = 0; l <= lmax; ++l) {
    auto jp = [&](double z) {
      return (l == 0 ? -std::sph_bessel(1, z)
                     : std::sph_bessel(l - 1, z) - (l + 1) / z * std::sph_bessel(l, z));
    };
    auto yp = [&](double z) {
      return (l == 0 ? -std::sph_neumann(1, z)
                     : std::sph_neumann(l - 1, z) - (l + 1) / z * std::sph_neumann(l, z));
    };
    const std::complex<double> hp(jp(ka), yp(ka));
    const std::complex<double> h(std::sph_bessel(l, kr), std::sph_neumann(l, kr));
    sum -= il * (2.0 * l + 1.0) * (jp(ka) / hp) * h * std::legendre(l, cosg);
    il *= std::complex<double>(0.0, 1.0);
  }
  return sum;
}

// Scattered field of e^{ik d.x} off a penetrable sphere of radius a with
// interior wavenumber km, continuous value and normal derivative.
inline std::complex<double> penetrable_sphere_scattered(double k, double km, double a,
                                                        const Eigen::Vector3d& d,
                                                        const Eigen::Vector3d& x,
                                                        int lmax = 60) {
  const double r = x.norm();
  const double cosg = d.normalized().dot(x) / r;
  auto dj = [](int l, double z) {
    return l == 0 ? -std::sph_bessel(1, z)
                  : std::sph_bessel(l - 1, z) - (l + 1) / z * std::sph_bessel(l, z);
  };
  auto dy = [](int l, double z) {
    return l == 0 ? -std::sph_neumann(1, z)
                  : std::sph_neumann(l - 1, z) - (l + 1) / z * std::sph_neumann(l, z);
  };
  std::complex<double> sum = 0.0, il = 1.0;
  const double ka = k * a, kma = km * a;
  for (int l = 0; l <= lmax; ++l) {
    const double A = 2.0 * l + 1.0;
    const std::complex<double> h(std::sph_bessel(l, ka), std::sph_neumann(l, ka));
    const std::complex<double> hp(dj(l, ka), dy(l, ka));
    const double jm = std::sph_bessel(l, kma), jmp = dj(l, kma);
    // a h - c jm = -A j,  k a h' - km c jm' = -A k j'
    const std::complex<double> det = -h * km * jmp + jm * k * hp;
    const std::complex<double> al =
        (A * std::sph_bessel(l, ka) * km * jmp - A * k * dj(l, ka) * jm) / det;
    const std::complex<double> hr(std::sph_bessel(l, k * r), std::sph_neumann(l, k * r));
    sum += il * al * hr * std::legendre(l, cosg);
    il *= std::complex<double>(0.0, 1.0);
  }
  return sum;
}

}  // namespace qpmfs::testing
