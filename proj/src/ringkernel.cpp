#include "qpmfs/ringkernel.hpp"

#include <cmath>
#include <vector>

namespace qpmfs {

namespace {
constexpr double inv4pi = 1.0 / (4.0 * pi);

void check_q(int n, int q) {
  if (q < 2 * std::abs(n) + 4)
    throw InputError("ring kernel: q must be at least 2|n|+4");
}

// Samples of the kernel (and normal derivative) for a source ring at
// azimuths 2 pi l/q, target at azimuth 0.
void ring_samples(cplx k, PlanePoint t, PlanePoint nrm, PlanePoint s, int q,
                  cplx* val, cplx* der) {
  for (int l = 0; l < q; ++l) {
    const double phi = 2.0 * pi * l / q;
    const double dx = t.rho - s.rho * std::cos(phi);
    const double dy = -s.rho * std::sin(phi);
    const double dz = t.z - s.z;
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 == 0.0) throw InputError("ring kernel: target lies on the source ring");
    const double r = std::sqrt(r2);
    const cplx e = std::exp(I * k * r) * (inv4pi / r);
    if (val) val[l] = e;
    if (der) {
      const double dn = dx * nrm.rho + dz * nrm.z;
      der[l] = e * (I * k * r - 1.0) * (dn / r2);
    }
  }
}
}  // namespace

cplx greens(cplx k, const Vec3& x, const Vec3& y) {
  const double r = (x - y).norm();
  if (r == 0.0) throw InputError("greens: coincident points");
  return std::exp(I * k * r) * (inv4pi / r);
}

GreensGrad greens_grad(cplx k, const Vec3& x, const Vec3& y) {
  const Vec3 d = x - y;
  const double r = d.norm();
  if (r == 0.0) throw InputError("greens: coincident points");
  const cplx g = std::exp(I * k * r) * (inv4pi / r);
  const cplx f = g * (I * k * r - 1.0) / (r * r);
  return {g, f * d.cast<cplx>()};
}

cplx ring_value(cplx k, int n, PlanePoint target, PlanePoint source, int q) {
  check_q(n, q);
  if (source.rho == 0.0 && n != 0) return 0.0;
  std::vector<cplx> s(q);
  ring_samples(k, target, {}, source, q, s.data(), nullptr);
  cplx sum = 0.0;
  for (int l = 0; l < q; ++l) sum += s[l] * std::polar(1.0, -2.0 * pi * n * l / q);
  return sum / static_cast<double>(q);
}

cplx ring_normal_deriv(cplx k, int n, PlanePoint target, PlanePoint normal,
                       PlanePoint source, int q) {
  check_q(n, q);
  if (source.rho == 0.0 && n != 0) return 0.0;
  std::vector<cplx> s(q);
  ring_samples(k, target, normal, source, q, nullptr, s.data());
  cplx sum = 0.0;
  for (int l = 0; l < q; ++l) sum += s[l] * std::polar(1.0, -2.0 * pi * n * l / q);
  return sum / static_cast<double>(q);
}

void ring_modes(cplx k, PlanePoint target, PlanePoint normal, PlanePoint source,
                const Dft& dft, int P, std::span<cplx> value, std::span<cplx> deriv) {
  const int q = dft.size();
  if (q < P) throw InputError("ring_modes: q must be at least P");
  std::vector<cplx> v(value.empty() ? 0 : q), d(deriv.empty() ? 0 : q);
  ring_samples(k, target, normal, source, q, value.empty() ? nullptr : v.data(),
               deriv.empty() ? nullptr : d.data());
  if (!value.empty()) dft.samples_to_modes(v.data(), value.data(), P);
  if (!deriv.empty()) dft.samples_to_modes(d.data(), deriv.data(), P);
  if (source.rho == 0.0)
    for (int c = 0; c < P; ++c) {
      if (column_mode(c, P) == 0) continue;
      if (!value.empty()) value[c] = 0.0;
      if (!deriv.empty()) deriv[c] = 0.0;
    }
}

RateBound rate_bound(PlanePoint target, PlanePoint source) {
  if (!(target.rho > 0.0) || !(source.rho > 0.0))
    throw InputError("rate_bound: radii must be positive");
  const double dr = target.rho - source.rho, dz = target.z - source.z;
  const double x = (dr * dr + dz * dz) / (2.0 * target.rho * source.rho);
  // arccosh(1 + x) without cancellation for small x
  return {std::log1p(x + std::sqrt(x * (x + 2.0))), target, source};
}

int suggest_q(std::span<const PlanePoint> targets, std::span<const PlanePoint> sources,
              double tol, int max_n) {
  if (!(tol > 0.0 && tol < 1.0)) throw InputError("suggest_q: tol must lie in (0,1)");
  double amin = INFINITY;
  for (const auto& t : targets)
    for (const auto& s : sources) amin = std::min(amin, rate_bound(t, s).alpha_sup);
  if (!(amin > 0.0)) throw InputError("suggest_q: coincident source and target");
  int q = std::abs(max_n) + static_cast<int>(std::ceil(-std::log(tol) / amin));
  if (q % 2) ++q;
  return q;
}

}  // namespace qpmfs
