#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace qpmfs::cli {

using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json wood_json(const WoodReport& w) {
  json modes = json::array();
  for (const auto& m : w.modes) modes.push_back({{"m", m.m}, {"n", m.n}, {"margin", m.margin}});
  json j = {{"modes", modes}, {"min_margin", w.min_margin}, {"hard", w.hard}, {"note", w.note}};
  j["digits_lost"] = std::isfinite(w.digits_lost) ? json(w.digits_lost) : json(nullptr);
  return j;
}

json result_json(const RunConfig& cfg, const PeriodicProblem& pb, const SolveResult& res,
                 const ErrorReport& err, const WoodReport& wood, bool timings) {
  json j;
  j["format"] = kResultFormat;
  j["config"] = resolved_config(cfg, &pb);
  json modes = json::array();
  const RayleighBlochSet& rb = pb.rb();
  for (int r = 0; r < rb.size(); ++r) {
    const RbMode& m = rb.modes[r];
    modes.push_back({{"m", m.m},
                     {"n", m.n},
                     {"kx", m.kx},
                     {"ky", m.ky},
                     {"kz", to_json(m.kz)},
                     {"propagating", m.propagating},
                     {"a", to_json(res.a(r))},
                     {"b", to_json(res.b(r))}});
  }
  j["modes"] = modes;
  j["iterations"] = res.iterations;
  j["residual"] = res.residual;
  j["converged"] = res.converged;
  j["errors"] = {{"eps_bc", err.eps_bc},
                 {"eps_per", err.per.total},
                 {"eps_per_lr", err.per.lr},
                 {"eps_per_bf", err.per.bf},
                 {"wall_norm", err.per.wall_norm},
                 {"eps_flux", err.flux.value},
                 {"flux_no_propagating", err.flux.no_propagating},
                 {"wood_margin", err.wood_margin}};
  j["wood"] = wood_json(wood);
  j["svd_truncation"] = {{"relative_to_sigma_max", true},
                         {"a0", cfg.numerics.mfs.svd_tol},
                         {"q", cfg.numerics.q_svd_tol},
                         {"q_rank", pb.Qsvd().rank()}};
  if (timings)
    j["timings"] = {{"fill", res.timings.fill},
                    {"factor", res.timings.factor},
                    {"solve", res.timings.solve}};
  return j;
}

json csv_meta(const std::string& kind, const json& config) {
  return {{"format", kResultFormat}, {"kind", kind}, {"config", config}};
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "param,value,eps_bc,eps_per,eps_flux,iters,seconds\r\n";
  for (const auto& r : rows)
    os << r.param << ',' << num(r.value) << ',' << num(r.eps_bc) << ',' << num(r.eps_per) << ','
       << num(r.eps_flux) << ',' << r.iters << ',' << num(r.seconds) << "\r\n";
}

void write_basis_csv(std::ostream& os, const BasisComparison& cmp) {
  os << "basis,size,unknowns,eps_per,eps_flux,q_factor_seconds,probe_re,probe_im\r\n";
  for (const auto& r : cmp.rows)
    os << r.basis << ',' << r.size << ',' << r.unknowns << ',' << num(r.eps_per) << ','
       << num(r.eps_flux) << ',' << num(r.q_factor_seconds) << ',' << num(r.probe.real()) << ','
       << num(r.probe.imag()) << "\r\n";
}

namespace {

void parse_range(const std::string& s, double& lo, double& hi, int& n) {
  double a, b;
  int c;
  char extra;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d%c", &a, &b, &c, &extra) != 3)
    throw ConfigError("range '" + s + "' must look like lo:hi:n");
  if (c < 1 || !(b >= a)) throw ConfigError("range '" + s + "' needs lo <= hi and n >= 1");
  lo = a, hi = b, n = c;
}

}  // namespace

SliceSpec parse_slice(const std::string& plane, const std::string& u, const std::string& v) {
  SliceSpec s;
  char axis;
  double at;
  char extra;
  if (std::sscanf(plane.c_str(), "%c=%lf%c", &axis, &at, &extra) != 2 ||
      (axis != 'x' && axis != 'y' && axis != 'z'))
    throw ConfigError("plane '" + plane + "' must look like y=0");
  s.axis = axis;
  s.at = at;
  parse_range(u, s.u_lo, s.u_hi, s.nu);
  parse_range(v, s.v_lo, s.v_hi, s.nv);
  return s;
}

std::vector<Vec3> slice_points(const SliceSpec& s) {
  std::vector<Vec3> pts;
  auto lin = [](double lo, double hi, int n, int i) {
    return n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  };
  for (int j = 0; j < s.nv; ++j)
    for (int i = 0; i < s.nu; ++i) {
      const double u = lin(s.u_lo, s.u_hi, s.nu, i), v = lin(s.v_lo, s.v_hi, s.nv, j);
      if (s.axis == 'x') pts.emplace_back(s.at, u, v);
      else if (s.axis == 'y') pts.emplace_back(u, s.at, v);
      else pts.emplace_back(u, v, s.at);
    }
  return pts;
}

void write_field_csv(std::ostream& os, const PeriodicProblem& pb, const SolveResult& res,
                     const std::vector<Vec3>& points) {
  const std::vector<cplx> u = pb.eval_field(res, points);
  std::vector<Vec3> in_pts;
  std::vector<std::size_t> in_idx;
  std::vector<cplx> in_w;
  std::vector<bool> inside(points.size(), false);
  for (std::size_t t = 0; t < points.size(); ++t) {
    const Vec3& x = points[t];
    if (std::abs(x.z()) > pb.cell().z0) continue;
    const int m = static_cast<int>(std::lround(x.x() / pb.lattice().ex));
    const int n = static_cast<int>(std::lround(x.y() / pb.lattice().ey));
    const Vec3 x0 = x - m * pb.lattice().e1() - n * pb.lattice().e2();
    if (!pb.inside_obstacle(x0)) continue;
    inside[t] = true;
    if (pb.bc() == BcKind::transmission) {
      in_pts.push_back(x0);
      in_idx.push_back(t);
      in_w.push_back(std::pow(pb.phases().alpha, m) * std::pow(pb.phases().beta, n));
    }
  }
  std::vector<cplx> interior(points.size(), cplx(NAN, NAN));
  if (!in_pts.empty()) {
    const std::vector<cplx> v = pb.eval_interior(res, in_pts);
    for (std::size_t i = 0; i < in_idx.size(); ++i) interior[in_idx[i]] = in_w[i] * v[i];
  }
  os << "x,y,z,re_u,im_u,re_ut,im_ut,inside\r\n";
  for (std::size_t t = 0; t < points.size(); ++t) {
    const Vec3& x = points[t];
    cplx val = inside[t] ? interior[t] : u[t];
    cplx tot = inside[t] ? interior[t] : u[t] + pb.incident().value(x);
    os << num(x.x()) << ',' << num(x.y()) << ',' << num(x.z()) << ',' << num(val.real()) << ','
       << num(val.imag()) << ',' << num(tot.real()) << ',' << num(tot.imag()) << ','
       << (inside[t] ? 1 : 0) << "\r\n";
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace qpmfs::cli
