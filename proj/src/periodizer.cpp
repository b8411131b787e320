#include "qpmfs/periodizer.hpp"

#include <cmath>

#include "qpmfs/fourier.hpp"
#include "qpmfs/ringkernel.hpp"
#include "qpmfs/special_functions.hpp"
#include "qpmfs/waves.hpp"

namespace qpmfs {

BlochPhases bloch_phases(const IncidentWave& inc, const Lattice& lat) {
  return {std::exp(I * inc.kvec.dot(lat.e1())), std::exp(I * inc.kvec.dot(lat.e2()))};
}

std::vector<ImageCopy> near_images(const Lattice& lat, const BlochPhases& ph,
                                   bool include_center) {
  std::vector<ImageCopy> out;
  for (int n = -1; n <= 1; ++n)
    for (int m = -1; m <= 1; ++m) {
      if (m == 0 && n == 0 && !include_center) continue;
      out.push_back({m, n, m * lat.e1() + n * lat.e2(),
                     std::pow(ph.alpha, m) * std::pow(ph.beta, n)});
    }
  return out;
}

RayleighBlochSet rb_modes(const IncidentWave& inc, const Lattice& lat, int N0) {
  if (N0 < 0) throw InputError("N0 must be nonnegative");
  const double k = inc.k();
  const double kmax = pi * N0;
  RayleighBlochSet set;
  set.N0 = N0;
  const int mmax = static_cast<int>(std::ceil((kmax + std::abs(inc.kvec.x())) * lat.ex / (2 * pi))) + 1;
  const int nmax = static_cast<int>(std::ceil((kmax + std::abs(inc.kvec.y())) * lat.ey / (2 * pi))) + 1;
  for (int n = -nmax; n <= nmax; ++n)
    for (int m = -mmax; m <= mmax; ++m) {
      const double kx = inc.kvec.x() + 2 * pi * m / lat.ex;
      const double ky = inc.kvec.y() + 2 * pi * n / lat.ey;
      const double kt2 = kx * kx + ky * ky;
      if (kt2 > kmax * kmax) continue;
      const double d = k * k - kt2;
      RbMode mode{m, n, kx, ky, 0.0, false, false};
      mode.wood = std::abs(d) <= 1e-12 * k * k;
      if (mode.wood) {
        mode.kz = 0.0;
      } else if (d > 0) {
        mode.kz = std::sqrt(d);
        mode.propagating = true;
      } else {
        mode.kz = cplx(0.0, std::sqrt(-d));
      }
      set.modes.push_back(mode);
    }
  return set;
}

namespace {

// Panel edges from cumulative weights on [-1, 1].
void panel_midpoints(int n, std::vector<double>& x, std::vector<double>& w) {
  const auto rule = special::gauss_legendre(n);
  x.resize(n);
  w = rule.weights;
  double a = -1.0;
  for (int i = 0; i < n; ++i) {
    x[i] = a + 0.5 * rule.weights[i];
    a += rule.weights[i];
  }
}

UnitCell build_cell(const Lattice& lat, double z0, int M1, bool test) {
  if (!(lat.ex > 0 && lat.ey > 0)) throw InputError("lattice periods must be positive");
  if (!(z0 > 0)) throw InputError("z0 must be positive");
  if (M1 < 1) throw InputError("M1 must be positive");
  std::vector<double> s, w;
  if (test) {
    panel_midpoints(M1, s, w);
  } else {
    const auto rule = special::gauss_legendre(M1);
    s = rule.nodes;
    w = rule.weights;
  }
  UnitCell c;
  c.lattice = lat;
  c.z0 = z0;
  c.M1 = M1;
  const double hx = lat.ex / 2, hy = lat.ey / 2;
  // node index i + M1 j, i along the first free coordinate
  for (int j = 0; j < M1; ++j)
    for (int i = 0; i < M1; ++i) {
      c.L.points.emplace_back(-hx, hy * s[i], z0 * s[j]);
      c.L.weights.push_back(hy * z0 * w[i] * w[j]);
      c.B.points.emplace_back(hx * s[i], -hy, z0 * s[j]);
      c.B.weights.push_back(hx * z0 * w[i] * w[j]);
      c.D.points.emplace_back(hx * s[i], hy * s[j], -z0);
      c.D.weights.push_back(hx * hy * w[i] * w[j]);
    }
  return c;
}

}  // namespace

UnitCell make_unit_cell(const Lattice& lat, double z0, int M1) {
  return build_cell(lat, z0, M1, false);
}

UnitCell make_test_cell(const Lattice& lat, double z0, int M1) {
  return build_cell(lat, z0, M1, true);
}

double default_z0(const GeneratingCurve& curve, const Lattice& lat) {
  const double e = std::min(lat.ex, lat.ey);
  const double h = std::max(std::abs(curve.z_min()), std::abs(curve.z_max()));
  return std::max(h + 0.25 * e, 0.5 * e);
}

int min_M1(double k) { return static_cast<int>(std::ceil(4.0 * k / pi)); }

AuxBasis spherical_basis(int p) {
  if (p < 0) throw InputError("aux degree p must be nonnegative");
  AuxBasis a;
  a.kind = AuxKind::spherical_harmonics;
  a.p = p;
  return a;
}

AuxBasis proxy_basis(std::vector<Vec3> points) {
  AuxBasis a;
  a.kind = AuxKind::proxy_points;
  a.proxies = std::move(points);
  return a;
}

void eval_aux(const AuxBasis& aux, double k, std::span<const Vec3> points,
              std::span<const Vec3> dirs, CMatrix* values, CMatrix* derivs) {
  const int T = static_cast<int>(points.size());
  const int n = aux.size();
  const bool want_d = derivs != nullptr;
  if (want_d && dirs.size() != points.size())
    throw InputError("eval_aux: one direction per point required");
  if (values) values->resize(T, n);
  if (want_d) derivs->resize(T, n);
  if (aux.kind == AuxKind::spherical_harmonics) {
#pragma omp parallel
    {
      RegularWaves w(k, aux.p);
#pragma omp for schedule(static)
      for (int t = 0; t < T; ++t) {
        w.eval(points[t], want_d);
        const Vec3c d = want_d ? Vec3c(dirs[t].cast<cplx>()) : Vec3c(Vec3c::Zero());
        for (int i = 0; i < n; ++i) {
          if (values) (*values)(t, i) = w.value[i];
          if (want_d) (*derivs)(t, i) = w.grad[i].x() * d.x() + w.grad[i].y() * d.y() + w.grad[i].z() * d.z();
        }
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i) {
        const GreensGrad g = greens_grad(k, points[t], aux.proxies[i]);
        if (values) (*values)(t, i) = g.value;
        if (want_d)
          (*derivs)(t, i) = g.grad.x() * dirs[t].x() + g.grad.y() * dirs[t].y() + g.grad.z() * dirs[t].z();
      }
  }
}

CMatrix fill_B(const BoundaryNodes& nodes, const AuxBasis& aux, double k, int P, BcKind bc) {
  const int M = static_cast<int>(nodes.size());
  const int R = bc == BcKind::neumann ? M : 2 * M;
  const int q = P;
  const int na = aux.size();
  CMatrix out(static_cast<Eigen::Index>(R) * P, na);
  const Dft dft(q);
  std::vector<Vec3> pts(q), nrm(q);
  CMatrix val, der;
  std::vector<cplx> samp(q), modes(P);
  for (int m = 0; m < M; ++m) {
    for (int l = 0; l < q; ++l) {
      pts[l] = rotate(nodes.points[m], 2 * pi * l / q);
      nrm[l] = rotate(nodes.normals[m], 2 * pi * l / q);
    }
    eval_aux(aux, k, pts, nrm, bc == BcKind::transmission ? &val : nullptr, &der);
    for (int i = 0; i < na; ++i) {
      for (int l = 0; l < q; ++l) samp[l] = der(l, i);
      dft.samples_to_modes(samp.data(), modes.data(), P);
      const int row = bc == BcKind::neumann ? m : M + m;
      for (int c = 0; c < P; ++c) out(row + static_cast<Eigen::Index>(c) * R, i) = modes[c];
      if (bc == BcKind::transmission) {
        for (int l = 0; l < q; ++l) samp[l] = val(l, i);
        dft.samples_to_modes(samp.data(), modes.data(), P);
        for (int c = 0; c < P; ++c) out(m + static_cast<Eigen::Index>(c) * R, i) = modes[c];
      }
    }
  }
  return out;
}

namespace {

constexpr double inv4pi = 1.0 / (4.0 * pi);

// Accumulates w G(x, y) and w d/dx_axis G(x, y).
inline void add_g(double k, const Vec3& x, const Vec3& y, cplx w, int axis, cplx& v, cplx& d) {
  const Vec3 r = x - y;
  const double r2 = r.squaredNorm();
  const double rr = std::sqrt(r2);
  const cplx g = w * std::exp(I * (k * rr)) * (inv4pi / rr);
  v += g;
  d += g * cplx(-1.0, k * rr) * (r(axis) / r2);
}

}  // namespace

CMatrix fill_C(const RingSourceSet& sources, const UnitCell& cell, const BlochPhases& ph,
               double k, int P) {
  const int N = static_cast<int>(sources.size());
  const int q = P;
  const int G = cell.M1 * cell.M1;
  const int rows = 8 * G;
  const auto imgs = near_images(cell.lattice, ph, true);
  CMatrix C(rows, static_cast<Eigen::Index>(N) * P);
  // synthesis E(l, c) = e^{i n_c phi_l} / q
  CMatrix E(q, P);
  for (int l = 0; l < q; ++l)
    for (int c = 0; c < P; ++c)
      E(l, c) = std::polar(1.0 / q, column_mode(c, P) * 2 * pi * l / q);
  std::vector<ImageCopy> left, right, back, front;
  for (const auto& im : imgs) {
    if (im.m == -1) right.push_back(im);  // evaluated at R
    if (im.m == 1) left.push_back(im);    // evaluated at L, times alpha
    if (im.n == -1) front.push_back(im);  // evaluated at F
    if (im.n == 1) back.push_back(im);    // evaluated at B, times beta
  }
#pragma omp parallel
  {
    CMatrix K(rows, q);
#pragma omp for schedule(dynamic)
    for (int j = 0; j < N; ++j) {
      for (int l = 0; l < q; ++l) {
        const Vec3 y = rotate(sources.points[j], 2 * pi * l / q);
        for (int g = 0; g < G; ++g) {
          cplx v, d;
          // left/right
          {
            const Vec3& xl = cell.L.points[g];
            const Vec3 xr = cell.to_R(xl);
            cplx vr = 0, dr = 0, vl = 0, dl = 0;
            for (const auto& im : right) add_g(k, xr, y + im.shift, im.weight, 0, vr, dr);
            for (const auto& im : left) add_g(k, xl, y + im.shift, im.weight, 0, vl, dl);
            K(g, l) = vr - ph.alpha * vl;
            K(G + g, l) = dr - ph.alpha * dl;
          }
          {
            const Vec3& xb = cell.B.points[g];
            const Vec3 xf = cell.to_F(xb);
            cplx vf = 0, df = 0, vb = 0, db = 0;
            for (const auto& im : front) add_g(k, xf, y + im.shift, im.weight, 1, vf, df);
            for (const auto& im : back) add_g(k, xb, y + im.shift, im.weight, 1, vb, db);
            K(2 * G + g, l) = vf - ph.beta * vb;
            K(3 * G + g, l) = df - ph.beta * db;
          }
          {
            const Vec3& xd = cell.D.points[g];
            const Vec3 xt = cell.to_T(xd);
            v = d = 0;
            for (const auto& im : imgs) add_g(k, xt, y + im.shift, im.weight, 2, v, d);
            K(4 * G + g, l) = v;
            K(5 * G + g, l) = d;
            v = d = 0;
            for (const auto& im : imgs) add_g(k, xd, y + im.shift, im.weight, 2, v, d);
            K(6 * G + g, l) = v;
            K(7 * G + g, l) = d;
          }
        }
      }
      const CMatrix KE = K * E;
      for (int c = 0; c < P; ++c) C.col(j + static_cast<Eigen::Index>(c) * N) = KE.col(c);
    }
  }
  return C;
}

CMatrix fill_Q(const UnitCell& cell, const AuxBasis& aux, const RayleighBlochSet& rb,
               const BlochPhases& ph, double k) {
  const int G = cell.M1 * cell.M1;
  const int na = aux.size();
  const int nr = rb.size();
  CMatrix Q = CMatrix::Zero(8 * G, na + 2 * nr);
  auto pts_of = [](const std::vector<Vec3>& src, auto&& map) {
    std::vector<Vec3> out;
    out.reserve(src.size());
    for (const auto& x : src) out.push_back(map(x));
    return out;
  };
  const auto same = [](const Vec3& x) { return x; };
  const std::vector<Vec3> ex(G, Vec3(1, 0, 0)), ey(G, Vec3(0, 1, 0)), ez(G, Vec3(0, 0, 1));
  CMatrix v1, d1, v2, d2;
  // left/right
  eval_aux(aux, k, pts_of(cell.L.points, [&](const Vec3& x) { return cell.to_R(x); }), ex, &v1, &d1);
  eval_aux(aux, k, cell.L.points, ex, &v2, &d2);
  Q.block(0, 0, G, na) = v1 - ph.alpha * v2;
  Q.block(G, 0, G, na) = d1 - ph.alpha * d2;
  // back/front
  eval_aux(aux, k, pts_of(cell.B.points, [&](const Vec3& x) { return cell.to_F(x); }), ey, &v1, &d1);
  eval_aux(aux, k, cell.B.points, ey, &v2, &d2);
  Q.block(2 * G, 0, G, na) = v1 - ph.beta * v2;
  Q.block(3 * G, 0, G, na) = d1 - ph.beta * d2;
  // top/down
  const auto top = pts_of(cell.D.points, [&](const Vec3& x) { return cell.to_T(x); });
  eval_aux(aux, k, top, ez, &v1, &d1);
  eval_aux(aux, k, pts_of(cell.D.points, same), ez, &v2, &d2);
  Q.block(4 * G, 0, G, na) = v1;
  Q.block(5 * G, 0, G, na) = d1;
  Q.block(6 * G, 0, G, na) = v2;
  Q.block(7 * G, 0, G, na) = d2;
  for (int r = 0; r < nr; ++r) {
    const RbMode& md = rb.modes[r];
    for (int g = 0; g < G; ++g) {
      const Vec3& x = cell.D.points[g];
      const cplx e = std::exp(I * (md.kx * x.x() + md.ky * x.y()));
      Q(4 * G + g, na + r) = -e;
      Q(5 * G + g, na + r) = -I * md.kz * e;
      Q(6 * G + g, na + nr + r) = -e;
      Q(7 * G + g, na + nr + r) = I * md.kz * e;
    }
  }
  return Q;
}

}  // namespace qpmfs
