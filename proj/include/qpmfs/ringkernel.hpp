#pragma once

#include <span>

#include "qpmfs/fourier.hpp"
#include "qpmfs/types.hpp"

namespace qpmfs {

/// Free-space Helmholtz Green's function e^{ik|x-y|} / (4 pi |x-y|).
cplx greens(cplx k, const Vec3& x, const Vec3& y);

/// Green's function and its gradient with respect to the target x.
struct GreensGrad {
  cplx value;
  Vec3c grad;
};
GreensGrad greens_grad(cplx k, const Vec3& x, const Vec3& y);

/// Azimuthal mode n of the ring kernel: (1/q) sum_l G(x, y_l) e^{-2 pi i n l/q}
/// where x = (rho, 0, z) and y_l is the source point rotated by 2 pi l/q.
/// A ring carrying density e^{i n phi'} produces e^{i n phi} times this value.
cplx ring_value(cplx k, int n, PlanePoint target, PlanePoint source, int q);

/// As ring_value with the target normal derivative grad_x G . n_x, the
/// normal lying in the rho-z plane.
cplx ring_normal_deriv(cplx k, int n, PlanePoint target, PlanePoint normal,
                       PlanePoint source, int q);

/// All P modes (columns as in mode_column) of the ring kernel and, when
/// deriv is non-empty, of its normal derivative, from one q-point FFT.
/// dft.size() is q; requires q >= P.
void ring_modes(cplx k, PlanePoint target, PlanePoint normal, PlanePoint source,
                const Dft& dft, int P, std::span<cplx> value, std::span<cplx> deriv);

/// Exponential convergence rate of the trapezoid rule for the ring kernel.
struct RateBound {
  double alpha_sup;
  PlanePoint target, source;
};
RateBound rate_bound(PlanePoint target, PlanePoint source);

/// Node count reaching absolute tolerance tol for every target-source pair:
/// max_n + ceil(-ln(tol) / alpha_min), rounded up to even.
int suggest_q(std::span<const PlanePoint> targets, std::span<const PlanePoint> sources,
              double tol, int max_n);

}  // namespace qpmfs
