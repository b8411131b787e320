#include "qpmfs/onebody.hpp"

#include <cmath>
#include <string>

#include "helmholtz_kernel.hpp"
#include "qpmfs/ringkernel.hpp"

namespace qpmfs {

IncidentWave IncidentWave::from_angles(double k, double theta, double phi) {
  if (!(k > 0.0)) throw InputError("incident wavenumber must be positive");
  IncidentWave w;
  w.kvec = k * Vec3(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
                    std::sin(theta));
  return w;
}

cplx IncidentWave::value(const Vec3& x) const {
  return amplitude * std::exp(I * kvec.dot(x));
}

Vec3c IncidentWave::grad(const Vec3& x) const {
  return (I * value(x)) * kvec.cast<cplx>();
}

namespace {

void check_P(int P, int q) {
  if (P < 2 || P % 2) throw InputError("P must be a positive even integer");
  if (q < P) throw InputError("q must be at least P");
}

}  // namespace

ModeBlockSystem fill_neumann(const BoundaryNodes& nodes, const RingSourceSet& sources,
                             double k, int P, int q) {
  check_P(P, q);
  ModeBlockSystem sys;
  sys.bc = BcKind::neumann;
  sys.P = P;
  sys.q = q;
  sys.M = static_cast<int>(nodes.size());
  sys.N = static_cast<int>(sources.size());
  sys.blocks.assign(P, CMatrix(sys.M, sys.N));
  const Dft dft(q);
#pragma omp parallel
  {
    std::vector<cplx> d(P);
#pragma omp for schedule(dynamic)
    for (int m = 0; m < sys.M; ++m)
      for (int j = 0; j < sys.N; ++j) {
        ring_modes(k, nodes.points[m], nodes.normals[m], sources.points[j], dft, P, {}, d);
        for (int c = 0; c < P; ++c) sys.blocks[c](m, j) = d[c];
      }
  }
  return sys;
}

ModeBlockSystem fill_transmission(const BoundaryNodes& nodes, const RingSourceSet& inner,
                                  const RingSourceSet& outer, double k, cplx k_minus,
                                  int P, int q) {
  check_P(P, q);
  if (inner.side != Side::interior || outer.side != Side::exterior)
    throw InputError("transmission: source sets on the wrong sides");
  if (inner.size() != outer.size())
    throw InputError("transmission: source sets must have equal size");
  ModeBlockSystem sys;
  sys.bc = BcKind::transmission;
  sys.P = P;
  sys.q = q;
  sys.M = static_cast<int>(nodes.size());
  sys.N = static_cast<int>(inner.size());
  const int M = sys.M, N = sys.N;
  sys.blocks.assign(P, CMatrix(2 * M, 2 * N));
  const Dft dft(q);
#pragma omp parallel
  {
    std::vector<cplx> v(P), d(P);
#pragma omp for schedule(dynamic)
    for (int m = 0; m < M; ++m)
      for (int j = 0; j < N; ++j) {
        ring_modes(k, nodes.points[m], nodes.normals[m], inner.points[j], dft, P, v, d);
        for (int c = 0; c < P; ++c) {
          sys.blocks[c](m, j) = v[c];
          sys.blocks[c](M + m, j) = d[c];
        }
        ring_modes(k_minus, nodes.points[m], nodes.normals[m], outer.points[j], dft, P, v, d);
        for (int c = 0; c < P; ++c) {
          sys.blocks[c](m, N + j) = -v[c];
          sys.blocks[c](M + m, N + j) = -d[c];
        }
      }
  }
  return sys;
}

ModeBlockFactor::ModeBlockFactor(const ModeBlockSystem& sys, double tol)
    : rows_(sys.rows_per_mode()), cols_(sys.cols_per_mode()), svd_(sys.blocks.size()) {
  const int P = static_cast<int>(sys.blocks.size());
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < P; ++c) {
    try {
      svd_[c] = TruncatedSvd(sys.blocks[c], tol);
    } catch (const NumericalError& e) {
#pragma omp critical
      failure = "mode " + std::to_string(column_mode(c, P)) + ": " + e.what();
    }
  }
  if (!failure.empty()) throw NumericalError(failure);
}

CMatrix ModeBlockFactor::apply_pinv(const CMatrix& x) const {
  const int P = this->P();
  if (x.rows() != rows_ || x.cols() != P) throw InputError("apply_pinv: shape mismatch");
  CMatrix out(cols_, P);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < P; ++c) out.col(c) = svd_[c].apply_pinv(CVector(x.col(c)));
  return out;
}

CMatrix rhs_fourier(const CMatrix& samples, int P) {
  const int q = static_cast<int>(samples.cols());
  if (q % 2) throw InputError("rhs_fourier: q must be even");
  if (q < P) throw InputError("rhs_fourier: q must be at least P");
  const int R = static_cast<int>(samples.rows());
  CMatrix out(R, P);
  const Dft dft(q);
  std::vector<cplx> row(q), modes(P);
  for (int r = 0; r < R; ++r) {
    for (int l = 0; l < q; ++l) row[l] = samples(r, l);
    dft.samples_to_modes(row.data(), modes.data(), P);
    for (int c = 0; c < P; ++c) out(r, c) = modes[c];
  }
  return out;
}

CMatrix incident_rhs(const BoundaryNodes& nodes, const IncidentWave& inc, BcKind bc, int P) {
  const int M = static_cast<int>(nodes.size());
  const int q = P;
  CMatrix samples(bc == BcKind::neumann ? M : 2 * M, q);
  for (int m = 0; m < M; ++m) {
    for (int l = 0; l < q; ++l) {
      const double phi = 2.0 * pi * l / q;
      const Vec3 x = rotate(nodes.points[m], phi);
      const Vec3 n = rotate(nodes.normals[m], phi);
      const cplx dn = n.cast<cplx>().dot(inc.grad(x));
      if (bc == BcKind::neumann) {
        samples(m, l) = -dn;
      } else {
        samples(m, l) = -inc.value(x);
        samples(M + m, l) = -dn;
      }
    }
  }
  return rhs_fourier(samples, P);
}

int MfsParams::resolved_M() const {
  return M > 0 ? M : static_cast<int>(std::ceil(1.2 * N));
}

OneBodySetup make_setup(const GeneratingCurve& curve, BcKind bc, double k, cplx k_minus,
                        const MfsParams& params) {
  if (!(k > 0.0)) throw InputError("wavenumber must be positive");
  if (params.N < 1) throw InputError("N must be positive");
  if (params.P < 2 || params.P % 2) throw InputError("P must be a positive even integer");
  const int M = params.resolved_M();
  if (M < params.N) throw InputError("M must be at least N");
  BoundaryNodes nodes = boundary_nodes(curve, M);
  RingSourceSet inner = place_sources(curve, params.N, params.tau, params.scheme, Side::interior);
  std::optional<RingSourceSet> outer;
  if (bc == BcKind::transmission) {
    const double tm = params.tau_minus != 0.0 ? params.tau_minus : params.tau;
    outer = place_sources(curve, params.N, tm, params.scheme, Side::exterior);
  }
  int q = params.q;
  if (q == 0) {
    q = suggest_q(nodes.points, inner.points, 1e-14, params.P / 2);
    if (outer) q = std::max(q, suggest_q(nodes.points, outer->points, 1e-14, params.P / 2));
    q = std::max(q, params.P);
  }
  if (q < params.P) throw InputError("q must be at least P");
  return OneBodySetup{curve, bc, k, k_minus, params.P, q, std::move(nodes), std::move(inner),
                      std::move(outer)};
}

ModeBlockSystem fill_system(const OneBodySetup& s) {
  if (s.bc == BcKind::neumann) return fill_neumann(s.nodes, s.inner, s.k, s.P, s.q);
  return fill_transmission(s.nodes, s.inner, *s.outer, s.k, s.k_minus, s.P, s.q);
}

PointSources ring_point_sources(const RingSourceSet& sources, const CMatrix& coefs) {
  const int N = static_cast<int>(sources.size());
  const int P = static_cast<int>(coefs.cols());
  if (coefs.rows() != N) throw InputError("ring_point_sources: coefficient shape mismatch");
  const int q = P;
  const Dft dft(q);
  PointSources out;
  out.points.reserve(static_cast<std::size_t>(N) * q);
  out.strengths.resize(static_cast<std::size_t>(N) * q);
  std::vector<cplx> modes(P);
  for (int j = 0; j < N; ++j) {
    for (int c = 0; c < P; ++c) modes[c] = coefs(j, c);
    dft.modes_to_strengths(modes.data(), P, out.strengths.data() + static_cast<std::size_t>(j) * q);
    for (int l = 0; l < q; ++l) out.points.push_back(rotate(sources.points[j], 2.0 * pi * l / q));
  }
  return out;
}

void eval_point_sources(cplx k, const PointSources& src, const std::vector<Vec3>& targets,
                        std::vector<cplx>& values, std::vector<Vec3c>* grads) {
  const std::ptrdiff_t T = static_cast<std::ptrdiff_t>(targets.size());
  const std::size_t S = src.points.size();
  values.assign(T, 0.0);
  if (grads) grads->assign(T, Vec3c::Zero());
  if (k.imag() == 0.0) {
    const detail::SourceArrays arr(src.points, src.strengths.data());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < T; ++t)
      values[t] = detail::helmholtz_sum(k.real(), arr, targets[t], grads ? &(*grads)[t] : nullptr);
    return;
  }
  constexpr double inv4pi = 1.0 / (4.0 * pi);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < T; ++t) {
    const Vec3& x = targets[t];
    cplx v = 0.0;
    cplx gx = 0.0, gy = 0.0, gz = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double dx = x.x() - src.points[s].x();
      const double dy = x.y() - src.points[s].y();
      const double dz = x.z() - src.points[s].z();
      const double r2 = dx * dx + dy * dy + dz * dz;
      const double r = std::sqrt(r2);
      const cplx g = src.strengths[s] * std::exp(I * k * r) * (inv4pi / r);
      v += g;
      if (grads) {
        const cplx f = g * (I * k * r - 1.0) / r2;
        gx += f * dx;
        gy += f * dy;
        gz += f * dz;
      }
    }
    values[t] = v;
    if (grads) (*grads)[t] = Vec3c(gx, gy, gz);
  }
}

std::vector<cplx> eval_field_onebody(const CMatrix& coefs, const RingSourceSet& sources,
                                     double k, const std::vector<Vec3>& points) {
  const PointSources ps = ring_point_sources(sources, coefs);
  for (const auto& x : points)
    for (const auto& y : ps.points)
      if ((x - y).norm() == 0.0) throw InputError("evaluation point lies on a source ring");
  std::vector<cplx> out;
  eval_point_sources(k, ps, points, out);
  return out;
}

SurfaceGrid surface_grid(const GeneratingCurve& curve, int nt, int nphi) {
  SurfaceGrid g;
  g.nt = nt;
  g.nphi = nphi;
  g.dphi = 2.0 * pi / nphi;
  const double dt = pi / nt;
  for (int i = 0; i < nt; ++i) {
    const double t = dt * (i + 0.5);
    const CurveEval e = curve.eval(t);
    g.t.push_back(t);
    g.points.push_back({e.rho, e.z});
    g.normals.push_back(curve.normal(t));
    g.weights.push_back(e.rho * e.speed() * dt);
  }
  for (int j = 0; j < nphi; ++j) g.phi.push_back(g.dphi * (j + 0.5));
  return g;
}

void eval_on_surface(const SurfaceGrid& grid, const CMatrix& coefs, const RingSourceSet& src,
                     cplx k, int q, CMatrix* value, CMatrix* deriv) {
  const int P = static_cast<int>(coefs.cols());
  const int N = static_cast<int>(src.size());
  const int nt = grid.nt, nphi = grid.nphi;
  if (value) value->setZero(nt, nphi);
  if (deriv) deriv->setZero(nt, nphi);
  const Dft dft(q);
  // e^{i n phi_j} synthesis table
  CMatrix synth(P, nphi);
  for (int c = 0; c < P; ++c)
    for (int j = 0; j < nphi; ++j) synth(c, j) = std::polar(1.0, column_mode(c, P) * grid.phi[j]);
#pragma omp parallel
  {
    std::vector<cplx> v(P), d(P);
    CVector fv(P), fd(P);
#pragma omp for schedule(dynamic)
    for (int i = 0; i < nt; ++i) {
      fv.setZero();
      fd.setZero();
      for (int j = 0; j < N; ++j) {
        ring_modes(k, grid.points[i], grid.normals[i], src.points[j], dft, P,
                   value ? std::span<cplx>(v) : std::span<cplx>(),
                   deriv ? std::span<cplx>(d) : std::span<cplx>());
        for (int c = 0; c < P; ++c) {
          if (value) fv(c) += v[c] * coefs(j, c);
          if (deriv) fd(c) += d[c] * coefs(j, c);
        }
      }
      if (value) value->row(i) = (fv.transpose() * synth);
      if (deriv) deriv->row(i) = (fd.transpose() * synth);
    }
  }
}

double boundary_error(const OneBodySetup& s, const IncidentWave& inc, const CMatrix& coefs,
                      const CMatrix* coefs_minus, const SurfaceGrid& grid,
                      const CMatrix* extra_value, const CMatrix* extra_deriv) {
  const bool trans = s.bc == BcKind::transmission;
  CMatrix uv, ud, wv, wd;
  eval_on_surface(grid, coefs, s.inner, s.k, s.q, trans ? &uv : nullptr, &ud);
  if (trans) {
    if (!coefs_minus) throw InputError("boundary_error: interior coefficients missing");
    eval_on_surface(grid, *coefs_minus, *s.outer, s.k_minus, s.q, &wv, &wd);
  }
  double sum = 0.0;
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.nphi; ++j) {
      const Vec3 x = rotate(grid.points[i], grid.phi[j]);
      const Vec3 n = rotate(grid.normals[i], grid.phi[j]);
      cplx dn = ud(i, j) + n.cast<cplx>().dot(inc.grad(x));
      if (extra_deriv) dn += (*extra_deriv)(i, j);
      double r2;
      if (trans) {
        cplx val = uv(i, j) + inc.value(x) - wv(i, j);
        if (extra_value) val += (*extra_value)(i, j);
        dn -= wd(i, j);
        r2 = std::norm(val) + std::norm(dn);
      } else {
        r2 = std::norm(dn);
      }
      sum += r2 * grid.weights[i] * grid.dphi;
    }
  }
  return std::sqrt(sum);
}

CMatrix exterior_part(const CMatrix& eta, int N) { return eta.topRows(N); }
CMatrix interior_part(const CMatrix& eta, int N) { return eta.bottomRows(eta.rows() - N); }

OneBodyResult solve_onebody(const OneBodySetup& setup, const IncidentWave& inc, double svd_tol,
                            Vec3 probe) {
  const ModeBlockSystem sys = fill_system(setup);
  const ModeBlockFactor fac(sys, svd_tol);
  const CMatrix rhs = incident_rhs(setup.nodes, inc, setup.bc, setup.P);
  const CMatrix eta = fac.apply_pinv(rhs);
  const int N = sys.N;
  OneBodyResult res;
  res.coefs = exterior_part(eta, N);
  if (setup.bc == BcKind::transmission) res.coefs_minus = interior_part(eta, N);
  res.coef_norm = eta.norm();
  const SurfaceGrid grid = surface_grid(setup.curve);
  res.eps1 = boundary_error(setup, inc, res.coefs, res.coefs_minus ? &*res.coefs_minus : nullptr,
                            grid);
  res.probe = eval_field_onebody(res.coefs, setup.inner, setup.k, {probe})[0];
  return res;
}

}  // namespace qpmfs

namespace qpmfs {

cplx eval_ring_accurate(const CMatrix& coefs, const RingSourceSet& src, cplx k, int q,
                        const Vec3& x, Vec3c* grad) {
  const int P = static_cast<int>(coefs.cols());
  const int N = static_cast<int>(src.size());
  const double rho = std::hypot(x.x(), x.y());
  const double phi = rho > 0.0 ? std::atan2(x.y(), x.x()) : 0.0;
  const PlanePoint t{rho, x.z()};
  const Dft dft(std::max(q, P));
  std::vector<cplx> v(P), dr(P), dz(P);
  cplx u = 0.0, urho = 0.0, uz = 0.0, uphi = 0.0;
  for (int j = 0; j < N; ++j) {
    ring_modes(k, t, {1.0, 0.0}, src.points[j], dft, P, v,
               grad ? std::span<cplx>(dr) : std::span<cplx>());
    if (grad) ring_modes(k, t, {0.0, 1.0}, src.points[j], dft, P, {}, dz);
    for (int c = 0; c < P; ++c) {
      const int n = column_mode(c, P);
      const cplx e = std::polar(1.0, n * phi) * coefs(j, c);
      u += v[c] * e;
      if (grad) {
        urho += dr[c] * e;
        uz += dz[c] * e;
        uphi += I * static_cast<double>(n) * v[c] * e;
      }
    }
  }
  if (grad) {
    const double cp = std::cos(phi), sp = std::sin(phi);
    const cplx uphi_r = rho > 0.0 ? uphi / rho : cplx(0.0);
    *grad = Vec3c(urho * cp - uphi_r * sp, urho * sp + uphi_r * cp, uz);
  }
  return u;
}

}  // namespace qpmfs
