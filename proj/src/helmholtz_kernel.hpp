#pragma once

// Vectorizable inner loops for sums of Helmholtz point sources.

#include <cmath>
#include <cstddef>
#include <vector>

#include "qpmfs/types.hpp"

namespace qpmfs::detail {

/// sin and cos to about 1 ulp for |x| < 2^30, branch free so that loops
/// calling it vectorize (fdlibm kernels, three-part Cody-Waite reduction).
inline void sincos_simd(double x, double& s, double& c) {
  const double n = std::nearbyint(x * 0.63661977236758134308);
  double y = std::fma(-n, 1.57079632673412561417e+00, x);
  y = std::fma(-n, 6.07710050630396597660e-11, y);
  y = std::fma(-n, 2.02226624879595063154e-21, y);
  const double z = y * y;
  const double ps =
      y + y * z *
              (-1.66666666666666324348e-01 +
               z * (8.33333333332248946124e-03 +
                    z * (-1.98412698298579493134e-04 +
                         z * (2.75573137070700676789e-06 +
                              z * (-2.50507602534068634195e-08 + z * 1.58969099521155010221e-10)))));
  const double pc =
      1.0 - 0.5 * z +
      z * z *
          (4.16666666666666019037e-02 +
           z * (-1.38888888888741095749e-03 +
                z * (2.48015872894767294178e-05 +
                     z * (-2.75573143513906633035e-07 +
                          z * (2.08757232129817482790e-09 + z * -1.13596475577881948265e-11)))));
  const int q = static_cast<int>(n) & 3;
  const double ss = (q & 1) ? pc : ps;
  const double cc = (q & 1) ? ps : pc;
  s = (q & 2) ? -ss : ss;
  c = ((q + 1) & 2) ? -cc : cc;
}

/// Sources in structure-of-arrays form.
struct SourceArrays {
  std::vector<double> x, y, z, wr, wi;
  SourceArrays(const std::vector<Vec3>& pts, const cplx* w) { assign(pts.data(), pts.size(), w); }
  SourceArrays(const Vec3* pts, std::size_t n, const cplx* w) { assign(pts, n, w); }
  std::size_t size() const { return x.size(); }

 private:
  void assign(const Vec3* pts, std::size_t n, const cplx* w) {
    x.resize(n), y.resize(n), z.resize(n), wr.resize(n), wi.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      x[s] = pts[s].x(), y[s] = pts[s].y(), z[s] = pts[s].z();
      wr[s] = w[s].real(), wi[s] = w[s].imag();
    }
  }
};

/// sum_s w_s e^{ikr}/(4 pi r) at one target for real k; optionally the
/// gradient (gx, gy, gz) of the sum.
inline cplx helmholtz_sum(double k, const SourceArrays& src, const Vec3& t, Vec3c* grad) {
  const std::size_t S = src.size();
  const double* sx = src.x.data();
  const double* sy = src.y.data();
  const double* sz = src.z.data();
  const double* wr = src.wr.data();
  const double* wi = src.wi.data();
  const double x = t.x(), y = t.y(), z = t.z();
  double vr = 0, vi = 0;
  if (!grad) {
#pragma omp simd reduction(+ : vr, vi)
    for (std::size_t s = 0; s < S; ++s) {
      const double dx = x - sx[s], dy = y - sy[s], dz = z - sz[s];
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      const double ir = 1.0 / r;
      double sn, cs;
      sincos_simd(k * r, sn, cs);
      sn *= ir, cs *= ir;
      vr += wr[s] * cs - wi[s] * sn;
      vi += wr[s] * sn + wi[s] * cs;
    }
  } else {
    double xr = 0, xi = 0, yr = 0, yi = 0, zr = 0, zi = 0;
#pragma omp simd reduction(+ : vr, vi, xr, xi, yr, yi, zr, zi)
    for (std::size_t s = 0; s < S; ++s) {
      const double dx = x - sx[s], dy = y - sy[s], dz = z - sz[s];
      const double r2 = dx * dx + dy * dy + dz * dz;
      const double r = std::sqrt(r2);
      const double ir = 1.0 / r;
      double sn, cs;
      sincos_simd(k * r, sn, cs);
      sn *= ir, cs *= ir;
      const double gr = wr[s] * cs - wi[s] * sn;
      const double gi = wr[s] * sn + wi[s] * cs;
      vr += gr;
      vi += gi;
      // g (ikr - 1) / r^2
      const double ir2 = ir * ir;
      const double fr = (-gr - gi * k * r) * ir2;
      const double fi = (-gi + gr * k * r) * ir2;
      xr += fr * dx, xi += fi * dx;
      yr += fr * dy, yi += fi * dy;
      zr += fr * dz, zi += fi * dz;
    }
    constexpr double c = 1.0 / (4.0 * pi);
    *grad = Vec3c(cplx(xr, xi) * c, cplx(yr, yi) * c, cplx(zr, zi) * c);
  }
  return cplx(vr, vi) * (1.0 / (4.0 * pi));
}

}  // namespace qpmfs::detail
