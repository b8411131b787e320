#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qpmfs/periodizer.hpp"
#include "qpmfs/ringkernel.hpp"

namespace qpmfs::testing {

inline Vec3 lift(PlanePoint p, double phi) {
  return {p.rho * std::cos(phi), p.rho * std::sin(phi), p.z};
}

// Mean over the source circle of G(x, y(phi)) e^{-i n phi}, adaptive quadrature.
// With a normal, the normal derivative at the target is taken instead.
inline cplx ring_oracle(double k, int n, PlanePoint t, PlanePoint s, const PlanePoint* normal) {
  auto f = [&](double phi, bool im) {
    const Vec3 x = lift(t, 0), y = lift(s, phi);
    const Vec3 d = x - y;
    const double r = d.norm();
    cplx g = std::exp(cplx(0, k * r)) / (4 * pi * r);
    if (normal) {
      const Vec3 nv(normal->rho, 0, normal->z);
      g *= (cplx(0, k) - 1.0 / r) * d.dot(nv) / r;
    }
    g *= std::polar(1.0, -n * phi) / (2 * pi);
    return im ? g.imag() : g.real();
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double re = GK::integrate([&](double p) { return f(p, false); }, -pi, pi, 15, 1e-13);
  const double im = GK::integrate([&](double p) { return f(p, true); }, -pi, pi, 15, 1e-13);
  return {re, im};
}

// Least-squares slope of -log(err) against q.
inline double fitted_slope(const std::vector<double>& q, const std::vector<double>& err) {
  double sq = 0, se = 0, sqq = 0, sqe = 0;
  const double n = static_cast<double>(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double l = std::log(err[i]);
    sq += q[i], se += l, sqq += q[i] * q[i], sqe += q[i] * l;
  }
  return -(n * sqe - sq * se) / (n * sqq - sq * sq);
}

// Largest difference between the columns of fill_C and the wall discrepancies
// of the 3x3 near-image field summed point by point, for nrings random rings.
inline double cancellation_discrepancy(int nrings, unsigned seed) {
  const double k = 3.0;
  const Lattice lat{1.3, 1.1};
  const auto inc = IncidentWave::from_angles(k, -0.7, 0.9);
  const auto ph = bloch_phases(inc, lat);
  const auto cell = make_unit_cell(lat, 0.7, 5);
  const int P = 8, G = 25;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ur(0.05, 0.5), uz(-0.4, 0.4);
  RingSourceSet src;
  for (int j = 0; j < nrings; ++j) src.points.push_back({ur(rng), uz(rng)});
  const CMatrix C = fill_C(src, cell, ph, k, P);
  const auto imgs = near_images(lat, ph, true);
  double worst = 0;
  for (int j = 0; j < nrings; ++j)
    for (int c = 0; c < P; ++c) {
      const int n = column_mode(c, P);
      std::vector<Vec3> ys;
      std::vector<cplx> ws;
      for (int l = 0; l < P; ++l) {
        const double phi = 2 * pi * l / P;
        ys.push_back(lift(src.points[j], phi));
        ws.push_back(std::polar(1.0 / P, n * phi));
      }
      auto field = [&](const Vec3& x, int dir, cplx& v, cplx& d) {
        v = d = 0;
        for (const auto& im : imgs)
          for (int l = 0; l < P; ++l) {
            const auto g = greens_grad(k, x, ys[l] + im.shift);
            v += im.weight * ws[l] * g.value;
            d += im.weight * ws[l] * g.grad[dir];
          }
      };
      const auto col = C.col(j + c * nrings);
      for (int g = 0; g < G; ++g) {
        cplx vr, dr, vl, dl, vf, df, vb, db, vt, dt, vd, dd;
        field(cell.to_R(cell.L.points[g]), 0, vr, dr);
        field(cell.L.points[g], 0, vl, dl);
        field(cell.to_F(cell.B.points[g]), 1, vf, df);
        field(cell.B.points[g], 1, vb, db);
        field(cell.to_T(cell.D.points[g]), 2, vt, dt);
        field(cell.D.points[g], 2, vd, dd);
        const cplx ref[8] = {vr - ph.alpha * vl, dr - ph.alpha * dl, vf - ph.beta * vb,
                             df - ph.beta * db, vt, dt, vd, dd};
        for (int r = 0; r < 8; ++r) worst = std::max(worst, std::abs(col(r * G + g) - ref[r]));
      }
    }
  return worst;
}

}  // namespace qpmfs::testing
