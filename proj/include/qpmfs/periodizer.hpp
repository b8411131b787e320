#pragma once

#include <span>
#include <vector>

#include "qpmfs/geometry.hpp"
#include "qpmfs/onebody.hpp"
#include "qpmfs/types.hpp"

namespace qpmfs {

/// Rectangular lattice e1 = (ex, 0, 0), e2 = (0, ey, 0).
struct Lattice {
  double ex = 1.0, ey = 1.0;
  Vec3 e1() const { return {ex, 0, 0}; }
  Vec3 e2() const { return {0, ey, 0}; }
};

struct BlochPhases {
  cplx alpha = 1.0, beta = 1.0;
};

/// alpha = e^{i k.e1}, beta = e^{i k.e2}.
BlochPhases bloch_phases(const IncidentWave& inc, const Lattice& lattice);

/// One translated copy of the obstacle: shift m e1 + n e2, weight alpha^m beta^n.
struct ImageCopy {
  int m, n;
  Vec3 shift;
  cplx weight;
};
/// The 3 x 3 block of copies around (and optionally including) the center.
std::vector<ImageCopy> near_images(const Lattice& lattice, const BlochPhases& ph,
                                   bool include_center);

struct RbMode {
  int m, n;
  double kx, ky;
  cplx kz;           ///< sqrt(k^2 - kx^2 - ky^2), Re >= 0 and Im >= 0
  bool propagating;  ///< kz real and positive
  bool wood;         ///< kz vanishes to rounding
};

/// Rayleigh-Bloch orders with kx^2 + ky^2 <= (pi N0)^2.
struct RayleighBlochSet {
  int N0 = 0;
  std::vector<RbMode> modes;
  int size() const { return static_cast<int>(modes.size()); }
};
RayleighBlochSet rb_modes(const IncidentWave& inc, const Lattice& lattice, int N0);

/// Tensor-product nodes on one face, with quadrature weights.
struct WallNodes {
  std::vector<Vec3> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// Cell [-ex/2, ex/2] x [-ey/2, ey/2] x [-z0, z0]. Nodes live on L (x = -ex/2),
/// B (y = -ey/2) and D (z = -z0); R, F and T are their translates by e1, e2
/// and 2 z0 e_z.
struct UnitCell {
  Lattice lattice;
  double z0 = 1.0;
  int M1 = 0;
  WallNodes L, B, D;
  Vec3 to_R(const Vec3& x) const { return x + lattice.e1(); }
  Vec3 to_F(const Vec3& x) const { return x + lattice.e2(); }
  Vec3 to_T(const Vec3& x) const { return x + Vec3(0, 0, 2 * z0); }
  /// Number of wall rows in C and Q.
  int rows() const { return 8 * M1 * M1; }
};

/// Gauss-Legendre collocation nodes (M1 x M1 per face).
UnitCell make_unit_cell(const Lattice& lattice, double z0, int M1);
/// Test nodes at the midpoints of the Gauss panels (panel edges at the
/// cumulative Gauss weights), weighted by panel area.
UnitCell make_test_cell(const Lattice& lattice, double z0, int M1);

/// z0 = max(half-height + min(ex, ey)/4, min(ex, ey)/2).
double default_z0(const GeneratingCurve& curve, const Lattice& lattice);
/// Smallest wall resolution ceil(4 k / pi).
int min_M1(double k);

enum class AuxKind { spherical_harmonics, proxy_points };

/// Smooth auxiliary basis for the far lattice sum: regular spherical waves
/// j_l(kr) Y_lm, l <= p, or monopoles at proxy points.
struct AuxBasis {
  AuxKind kind = AuxKind::spherical_harmonics;
  int p = 0;
  std::vector<Vec3> proxies;
  int size() const {
    return kind == AuxKind::spherical_harmonics ? (p + 1) * (p + 1)
                                                : static_cast<int>(proxies.size());
  }
};
AuxBasis spherical_basis(int p);
AuxBasis proxy_basis(std::vector<Vec3> points);

/// Values (T x size) and, when dirs is non-empty, directional derivatives
/// grad . dirs[t] of every basis function.
void eval_aux(const AuxBasis& aux, double k, std::span<const Vec3> points,
              std::span<const Vec3> dirs, CMatrix* values, CMatrix* derivs);

/// Mode coefficients over each node ring (q = P) of the auxiliary functions:
/// Neumann rows hold normal derivatives, transmission rows values then
/// normal derivatives. Row r + c R for ring row r and mode column c.
CMatrix fill_B(const BoundaryNodes& nodes, const AuxBasis& aux, double k, int P, BcKind bc);

/// Wall discrepancy rows of the near-image sum for each ring mode coefficient
/// (column j + c N). Row groups of M1^2: LR value, LR x-derivative, BF value,
/// BF y-derivative, T value, T z-derivative, D value, D z-derivative.
CMatrix fill_C(const RingSourceSet& sources, const UnitCell& cell, const BlochPhases& ph,
               double k, int P);

/// Wall rows of the auxiliary basis and Rayleigh-Bloch columns: [S | W_a | W_b].
CMatrix fill_Q(const UnitCell& cell, const AuxBasis& aux, const RayleighBlochSet& rb,
               const BlochPhases& ph, double k);

}  // namespace qpmfs
