#include "qpmfs/diagnostics.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace qpmfs {

double eps_bc(const PeriodicProblem& pb, const SolveResult& res, int nt, int nphi) {
  const OneBodySetup& s = pb.setup();
  const SurfaceGrid grid = surface_grid(s.curve, nt, nphi);
  const int N = pb.N();
  const CMatrix ext = res.eta.topRows(N);
  std::vector<Vec3> pts, nrm;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nphi; ++j) {
      pts.push_back(rotate(grid.points[i], grid.phi[j]));
      nrm.push_back(rotate(grid.normals[i], grid.phi[j]));
    }
  const bool trans = pb.bc() == BcKind::transmission;
  const PointSources img = pb.image_sources(ext, false);
  std::vector<cplx> iv(pts.size()), id(pts.size());
  pb.backend().evaluate(pb.k(), img.points, img.strengths, pts, nrm, iv.data(), id.data());
  CMatrix av, ad;
  eval_aux(pb.aux(), pb.k(), pts, nrm, &av, &ad);
  const CVector uav = av * res.d, uad = ad * res.d;
  CMatrix ev(nt, nphi), ed(nt, nphi);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nphi; ++j) {
      const std::size_t t = static_cast<std::size_t>(i) * nphi + j;
      ev(i, j) = iv[t] + uav(t);
      ed(i, j) = id[t] + uad(t);
    }
  CMatrix inner;
  if (trans) inner = res.eta.bottomRows(N);
  return boundary_error(s, pb.incident(), ext, trans ? &inner : nullptr, grid, &ev, &ed);
}

PeriodicityError eps_per_field(const UnitCell& tc, const BlochPhases& ph, const FieldFn& field) {
  const std::size_t G = tc.L.size();
  std::vector<Vec3> pts;
  pts.reserve(4 * G);
  for (const auto& x : tc.L.points) pts.push_back(x);
  for (const auto& x : tc.L.points) pts.push_back(tc.to_R(x));
  for (const auto& x : tc.B.points) pts.push_back(x);
  for (const auto& x : tc.B.points) pts.push_back(tc.to_F(x));
  std::vector<cplx> u;
  std::vector<Vec3c> g;
  field(pts, u, g);
  PeriodicityError e;
  double lr = 0, bf = 0, wn = 0;
  for (std::size_t i = 0; i < G; ++i) {
    const double wl = tc.L.weights[i], wb = tc.B.weights[i];
    const cplx d1 = u[G + i] - ph.alpha * u[i];
    const cplx d2 = g[G + i].x() - ph.alpha * g[i].x();
    const cplx d3 = u[3 * G + i] - ph.beta * u[2 * G + i];
    const cplx d4 = g[3 * G + i].y() - ph.beta * g[2 * G + i].y();
    lr += wl * (std::norm(d1) + std::norm(d2));
    bf += wb * (std::norm(d3) + std::norm(d4));
    wn += wl * std::norm(u[i]) + wb * std::norm(u[2 * G + i]);
  }
  e.lr = std::sqrt(lr);
  e.bf = std::sqrt(bf);
  e.total = std::sqrt(lr + bf);
  e.wall_norm = std::sqrt(wn);
  return e;
}

PeriodicityError eps_per(const PeriodicProblem& pb, const SolveResult& res, int M1_test) {
  const UnitCell tc =
      make_test_cell(pb.lattice(), pb.cell().z0, M1_test > 0 ? M1_test : pb.cell().M1);
  return eps_per_field(tc, pb.phases(), [&](std::span<const Vec3> x, std::vector<cplx>& u,
                                            std::vector<Vec3c>& g) { pb.eval_cell(res, x, u, &g); });
}

FluxError eps_flux(const RayleighBlochSet& rb, const CVector& a, const CVector& b, double z0,
                   double amplitude) {
  FluxError f;
  double kz00 = 0.0, sum = 0.0;
  bool any = false;
  for (int r = 0; r < rb.size(); ++r) {
    const RbMode& md = rb.modes[r];
    if (md.m == 0 && md.n == 0) kz00 = md.kz.real();
    if (!md.propagating) continue;
    any = true;
    const double kz = md.kz.real();
    cplx bb = b(r);
    if (md.m == 0 && md.n == 0) bb += amplitude * std::exp(I * kz * z0);
    sum += kz * (std::norm(a(r)) + std::norm(bb));
  }
  f.no_propagating = !any;
  f.value = std::abs(sum - kz00 * amplitude * amplitude);
  return f;
}

FluxError eps_flux(const PeriodicProblem& pb, const SolveResult& res) {
  return eps_flux(pb.rb(), res.a, res.b, pb.cell().z0, pb.incident().amplitude);
}

WoodReport wood_check(const IncidentWave& inc, const Lattice& lattice, double margin_tol) {
  const double k = inc.k();
  // every order within the light cone plus a margin
  const int N0 = static_cast<int>(std::ceil(2.0 * k / pi)) + 2;
  const RayleighBlochSet rb = rb_modes(inc, lattice, N0);
  WoodReport w;
  w.min_margin = INFINITY;
  for (const auto& md : rb.modes) {
    const double margin = md.wood ? 0.0 : std::abs(md.kz) / k;
    w.min_margin = std::min(w.min_margin, margin);
    if (margin < margin_tol) w.modes.push_back({md.m, md.n, margin});
    if (md.wood) w.hard = true;
  }
  std::ostringstream os;
  if (w.hard) {
    os << "Wood anomaly: kz vanishes for";
    for (const auto& m : w.modes)
      if (m.margin == 0.0) os << " (" << m.m << "," << m.n << ")";
    w.digits_lost = INFINITY;
  } else if (!w.modes.empty()) {
    w.digits_lost = -std::log10(w.min_margin) / 2.0;
    os << "near Wood anomaly (min |kz|/k = " << w.min_margin << "): expect to lose about "
       << std::lround(w.digits_lost) << " digits";
  }
  w.note = os.str();
  return w;
}

ErrorReport error_report(const PeriodicProblem& pb, const SolveResult& res) {
  ErrorReport r;
  r.eps_bc = eps_bc(pb, res);
  r.per = eps_per(pb, res);
  r.flux = eps_flux(pb, res);
  r.wood_margin = wood_check(pb.incident(), pb.lattice()).min_margin;
  return r;
}

void set_param(PeriodicParams& p, const std::string& name, int v) {
  if (name == "N") p.mfs.N = v;
  else if (name == "P") p.mfs.P = v;
  else if (name == "q") p.mfs.q = v;
  else if (name == "p") p.p = v;
  else if (name == "N0") p.N0 = v;
  else if (name == "M1") p.M1 = v;
  else if (name == "N2") p.N2 = v;
  else throw InputError("unknown scan parameter '" + name + "'");
}

std::vector<ScanRow> scan(PeriodicProblem& pb, const std::string& param,
                          const std::vector<int>& values) {
  std::vector<ScanRow> rows;
  for (int v : values) {
    const auto t0 = std::chrono::steady_clock::now();
    PeriodicParams p = pb.params();
    set_param(p, param, v);
    pb.update(p);
    const SolveResult res = pb.solve();
    const ErrorReport e = error_report(pb, res);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back({param, static_cast<double>(v), e.eps_bc, e.per.total, e.flux.value,
                    res.iterations, secs});
  }
  return rows;
}

}  // namespace qpmfs
