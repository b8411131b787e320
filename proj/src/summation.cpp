#include "qpmfs/summation.hpp"

#include <cmath>
#include <vector>

#include "helmholtz_kernel.hpp"
#include "qpmfs/waves.hpp"

namespace qpmfs {

void DirectBackend::evaluate(double k, std::span<const Vec3> sources,
                             std::span<const cplx> weights, std::span<const Vec3> targets,
                             std::span<const Vec3> normals, cplx* values, cplx* derivs) const {
  const std::ptrdiff_t T = static_cast<std::ptrdiff_t>(targets.size());
  const bool want_d = derivs != nullptr;
  if (want_d && normals.size() != targets.size())
    throw InputError("direct backend: normals required for derivatives");
  const detail::SourceArrays src(sources.data(), sources.size(), weights.data());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < T; ++t) {
    Vec3c g;
    const cplx v = detail::helmholtz_sum(k, src, targets[t], want_d ? &g : nullptr);
    if (values) values[t] = v;
    if (want_d) derivs[t] = g.x() * normals[t].x() + g.y() * normals[t].y() + g.z() * normals[t].z();
  }
}

int LocalExpansionBackend::degree_for(double k, double rt, double rs) const {
  if (!(rs > 0.0)) return -1;
  const double ratio = rt / rs;
  if (ratio > max_ratio_) return -1;
  const double geometric = ratio > 0.0 ? std::log(tol_) / std::log(ratio) : 0.0;
  const int L = static_cast<int>(std::ceil(geometric + k * rt + 8.0));
  // keep h_l(k rs) far from overflow
  if (L > 200) return -1;
  return L;
}

void LocalExpansionBackend::evaluate(double k, std::span<const Vec3> sources,
                                     std::span<const cplx> weights,
                                     std::span<const Vec3> targets,
                                     std::span<const Vec3> normals, cplx* values,
                                     cplx* derivs) const {
  double rs = INFINITY, rt = 0.0;
  for (const auto& y : sources) rs = std::min(rs, y.norm());
  for (const auto& x : targets) rt = std::max(rt, x.norm());
  const int L = degree_for(k, rt, rs);
  if (L < 0 || sources.empty()) {
    DirectBackend().evaluate(k, sources, weights, targets, normals, values, derivs);
    return;
  }
  const bool want_d = derivs != nullptr;
  if (want_d && normals.size() != targets.size())
    throw InputError("local backend: normals required for derivatives");
  const int nc = special::lm_count(L);
  const std::ptrdiff_t S = static_cast<std::ptrdiff_t>(sources.size());

  // gather: c_lm = ik sum_s w_s h_l(k|y|) conj(Y_lm(y^))
  CVector coef = CVector::Zero(nc);
#pragma omp parallel
  {
    OutgoingFactors out(k, L);
    CVector local = CVector::Zero(nc);
#pragma omp for schedule(static)
    for (std::ptrdiff_t s = 0; s < S; ++s) {
      out.eval(sources[s]);
      const cplx w = weights[s];
      for (int i = 0; i < nc; ++i) local(i) += w * out.value[i];
    }
#pragma omp critical
    coef += local;
  }
  coef *= I * k;

  const std::ptrdiff_t T = static_cast<std::ptrdiff_t>(targets.size());
#pragma omp parallel
  {
    RegularWaves reg(k, L);
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < T; ++t) {
      reg.eval(targets[t], want_d);
      cplx v = 0.0;
      Vec3c g = Vec3c::Zero();
      for (int i = 0; i < nc; ++i) {
        v += coef(i) * reg.value[i];
        if (want_d) g += coef(i) * reg.grad[i];
      }
      if (values) values[t] = v;
      if (want_d) derivs[t] = g.x() * normals[t].x() + g.y() * normals[t].y() + g.z() * normals[t].z();
    }
  }
}

std::unique_ptr<SummationBackend> make_backend(const std::string& name) {
  if (name == "direct") return std::make_unique<DirectBackend>();
  if (name == "local") return std::make_unique<LocalExpansionBackend>();
  throw InputError("unknown summation backend '" + name + "'");
}

}  // namespace qpmfs
