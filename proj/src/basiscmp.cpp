#include "qpmfs/basiscmp.hpp"

#include <cmath>
#include <sstream>

#include "qpmfs/diagnostics.hpp"

namespace qpmfs {

Vec3 exterior_probe(const PeriodicProblem& pb, const Vec3& probe, std::string* note) {
  if (!pb.inside_obstacle(probe)) return probe;
  const double r = probe.norm();
  const Vec3 dir = r > 0 ? Vec3(probe / r) : Vec3(1, 0, 0);
  const double step = 0.01 * std::max(pb.setup().curve.rho_max(), 1e-3);
  Vec3 x = probe;
  while (pb.inside_obstacle(x)) x += step * dir;
  x += step * dir;
  if (note) {
    std::ostringstream os;
    os << "probe (" << probe.x() << "," << probe.y() << "," << probe.z()
       << ") lies inside the obstacle; moved to (" << x.x() << "," << x.y() << "," << x.z() << ")";
    *note = os.str();
  }
  return x;
}

BasisComparison compare_bases(PeriodicProblem& pb, const std::vector<int>& p_values,
                              const std::vector<int>& N2_values, const Vec3& probe) {
  BasisComparison out;
  out.probe = exterior_probe(pb, probe, &out.note);
  const PeriodicParams base = pb.params();
  auto run = [&](AuxKind kind, int size) {
    PeriodicParams p = base;
    p.aux = kind;
    if (kind == AuxKind::spherical_harmonics) p.p = size;
    else p.N2 = size;
    pb.update(p);
    const SolveResult res = pb.solve();
    const std::vector<Vec3> pt{out.probe};
    BasisRow row;
    row.basis = kind == AuxKind::spherical_harmonics ? "sph" : "proxy";
    row.size = size;
    row.unknowns = pb.aux().size();
    row.eps_per = eps_per(pb, res).total;
    row.eps_flux = eps_flux(pb, res).value;
    row.q_factor_seconds = pb.q_factor_seconds();
    row.probe = pb.eval_field(res, pt)[0];
    row.iterations = res.iterations;
    out.rows.push_back(row);
  };
  for (int p : p_values) run(AuxKind::spherical_harmonics, p);
  for (int n : N2_values) run(AuxKind::proxy_points, n);
  pb.update(base);
  return out;
}

int matched_size(const BasisComparison& cmp, const std::string& basis, double target) {
  int best = -1;
  for (const auto& r : cmp.rows)
    if (r.basis == basis && r.eps_per <= target && (best < 0 || r.size < best)) best = r.size;
  return best;
}

}  // namespace qpmfs
