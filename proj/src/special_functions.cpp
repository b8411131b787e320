#include "qpmfs/special_functions.hpp"

#include <cmath>
#include <utility>

namespace qpmfs::special {

void spherical_bessel_j(int lmax, double x, std::span<double> out) {
  if (lmax < 0 || static_cast<int>(out.size()) < lmax + 1)
    throw InputError("spherical_bessel_j: output span too small");
  if (x < 0.0) throw InputError("spherical_bessel_j: negative argument");
  if (x == 0.0) {
    out[0] = 1.0;
    for (int l = 1; l <= lmax; ++l) out[l] = 0.0;
    return;
  }
  if (x > static_cast<double>(lmax)) {
    // upward recurrence is stable while l < x
    out[0] = std::sin(x) / x;
    if (lmax >= 1) out[1] = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int l = 2; l <= lmax; ++l)
      out[l] = (2 * l - 1) / x * out[l - 1] - out[l - 2];
    return;
  }
  const int start =
      lmax + 20 + static_cast<int>(std::sqrt(40.0 * (lmax + x + 1.0)));
  std::vector<double> f(start + 2, 0.0);
  f[start + 1] = 0.0;
  f[start] = 1e-300;
  for (int l = start; l >= 1; --l) {
    f[l - 1] = (2 * l + 1) / x * f[l] - f[l + 1];
    if (std::abs(f[l - 1]) > 1e250)
      for (int i = l - 1; i <= start + 1; ++i) f[i] *= 1e-250;
  }
  // normalize against whichever of j_0, j_1 is larger (they never vanish together)
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / f[0] : j1 / f[1];
  for (int l = 0; l <= lmax; ++l) out[l] = f[l] * scale;
}

void spherical_harmonics(int lmax, double theta, double phi, Harmonics& out,
                         bool derivatives) {
  const int count = lm_count(lmax);
  out.y.assign(count, 0.0);
  if (derivatives) {
    out.dtheta.assign(count, 0.0);
    out.dphi_sin.assign(count, 0.0);
  }
  const double x = std::cos(theta);
  const double s = std::sin(theta);

  // Normalized associated Legendre with the sin^m factor split off:
  // Pbar_l^m(cos theta) = s^m * q(l, m).
  std::vector<double> q(count + 1, 0.0);
  auto Q = [&](int l, int m) -> double& { return q[lm_index(l, m)]; };
  Q(0, 0) = 1.0 / std::sqrt(4.0 * pi);
  for (int m = 1; m <= lmax; ++m)
    Q(m, m) = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * Q(m - 1, m - 1);
  for (int m = 0; m < lmax; ++m) Q(m + 1, m) = x * std::sqrt(2.0 * m + 3.0) * Q(m, m);
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 2; l <= lmax; ++l) {
      const double ll = static_cast<double>(l);
      const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m));
      const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - m * m) /
                                 (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
      Q(l, m) = a * (x * Q(l - 1, m) - b * Q(l - 2, m));
    }
  }

  std::vector<double> spow(lmax + 2, 1.0);
  for (int m = 1; m <= lmax + 1; ++m) spow[m] = spow[m - 1] * s;

  std::vector<double> pbar(count, 0.0);
  for (int l = 0; l <= lmax; ++l)
    for (int m = 0; m <= l; ++m) pbar[lm_index(l, m)] = spow[m] * Q(l, m);

  for (int m = 0; m <= lmax; ++m) {
    const cplx eim = std::polar(1.0, m * phi);
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (int l = m; l <= lmax; ++l) {
      const cplx y = pbar[lm_index(l, m)] * eim;
      out.y[lm_index(l, m)] = y;
      if (m > 0) out.y[lm_index(l, -m)] = sign * std::conj(y);
      if (!derivatives) continue;
      const double ll = static_cast<double>(l);
      double dp;
      if (m == 0) {
        dp = (l >= 1) ? std::sqrt(ll * (ll + 1.0)) * pbar[lm_index(l, 1)] : 0.0;
      } else {
        const double up = (m + 1 <= l) ? pbar[lm_index(l, m + 1)] : 0.0;
        dp = 0.5 * (std::sqrt((ll - m) * (ll + m + 1.0)) * up -
                    std::sqrt((ll + m) * (ll - m + 1.0)) * pbar[lm_index(l, m - 1)]);
      }
      const cplx dth = dp * eim;
      const cplx dph = (m == 0) ? cplx{0.0} : I * (m * spow[m - 1] * Q(l, m)) * eim;
      out.dtheta[lm_index(l, m)] = dth;
      out.dphi_sin[lm_index(l, m)] = dph;
      if (m > 0) {
        out.dtheta[lm_index(l, -m)] = sign * std::conj(dth);
        out.dphi_sin[lm_index(l, -m)] = sign * std::conj(dph);
      }
    }
  }
}

cplx erf(cplx z) {
  if (z.real() < 0.0) return -erf(-z);
  const double two_over_sqrtpi = 2.0 / std::sqrt(pi);
  if (std::abs(z) < 2.5) {
    const cplx z2 = z * z;
    cplx term = z;
    cplx sum = z;
    for (int n = 1; n < 200; ++n) {
      term *= -z2 / static_cast<double>(n);
      const cplx add = term / static_cast<double>(2 * n + 1);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return two_over_sqrtpi * sum;
  }
  // erfc(z) = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
  cplx tail = z;
  for (int n = 160; n >= 1; --n) tail = z + (0.5 * n) / tail;
  return 1.0 - std::exp(-z * z) / (std::sqrt(pi) * tail);
}

namespace {

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InputError("gauss_legendre: n must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace qpmfs::special
