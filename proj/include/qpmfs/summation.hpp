#pragma once

#include <memory>
#include <span>
#include <string>

#include "qpmfs/types.hpp"

namespace qpmfs {

/// Sums of weighted Helmholtz monopoles: values[t] = sum_s w_s G(x_t, y_s)
/// and, when requested, derivs[t] = sum_s w_s grad_x G(x_t, y_s) . n_t.
class SummationBackend {
 public:
  virtual ~SummationBackend() = default;
  virtual std::string name() const = 0;
  virtual void evaluate(double k, std::span<const Vec3> sources, std::span<const cplx> weights,
                        std::span<const Vec3> targets, std::span<const Vec3> normals,
                        cplx* values, cplx* derivs) const = 0;
};

/// Reference O(ST) summation.
class DirectBackend final : public SummationBackend {
 public:
  std::string name() const override { return "direct"; }
  void evaluate(double k, std::span<const Vec3> sources, std::span<const cplx> weights,
                std::span<const Vec3> targets, std::span<const Vec3> normals, cplx* values,
                cplx* derivs) const override;
};

/// Single-level local expansion about the origin, valid when every source lies
/// farther from the origin than every target: the sources are gathered into
/// regular spherical-wave coefficients of degree L, evaluated at the targets.
/// Falls back to direct summation when the separation ratio exceeds
/// max_ratio. L is chosen from the ratio and k to reach tol.
class LocalExpansionBackend final : public SummationBackend {
 public:
  explicit LocalExpansionBackend(double tol = 1e-13, double max_ratio = 0.7)
      : tol_(tol), max_ratio_(max_ratio) {}
  std::string name() const override { return "local"; }
  void evaluate(double k, std::span<const Vec3> sources, std::span<const cplx> weights,
                std::span<const Vec3> targets, std::span<const Vec3> normals, cplx* values,
                cplx* derivs) const override;

  /// Degree used for the given geometry, or -1 when direct summation applies.
  int degree_for(double k, double target_radius, double source_radius) const;

 private:
  double tol_;
  double max_ratio_;
};

std::unique_ptr<SummationBackend> make_backend(const std::string& name);

}  // namespace qpmfs
