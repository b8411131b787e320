#pragma once

#include <optional>
#include <vector>

#include "qpmfs/fourier.hpp"
#include "qpmfs/geometry.hpp"
#include "qpmfs/linalg.hpp"
#include "qpmfs/types.hpp"

namespace qpmfs {

/// Plane wave e^{i k_vec . x}. k_minus is the interior wavenumber used by
/// transmission problems (may carry a positive imaginary part).
struct IncidentWave {
  Vec3 kvec = Vec3(0, 0, -1);
  cplx k_minus = 0.0;
  double amplitude = 1.0;

  /// k_vec = k (cos th cos ph, cos th sin ph, sin th); th < 0 travels down.
  static IncidentWave from_angles(double k, double theta, double phi);
  double k() const { return kvec.norm(); }
  cplx value(const Vec3& x) const;
  Vec3c grad(const Vec3& x) const;
};

/// Per-mode MFS matrices. Block c (mode column_mode(c, P)) is
/// rows_per_mode x cols_per_mode: Neumann M x N, transmission 2M x 2N.
struct ModeBlockSystem {
  BcKind bc = BcKind::neumann;
  int P = 0;
  int q = 0;
  int M = 0, N = 0;
  std::vector<CMatrix> blocks;
  int rows_per_mode() const { return bc == BcKind::neumann ? M : 2 * M; }
  int cols_per_mode() const { return bc == BcKind::neumann ? N : 2 * N; }
};

/// Ring-kernel normal derivatives A'_n(node m, source j).
ModeBlockSystem fill_neumann(const BoundaryNodes& nodes, const RingSourceSet& sources,
                             double k, int P, int q);

/// Blocks [[A_n, -A^-_n], [A'_n, -A'^-_n]]: inner sources carry the
/// exterior field at wavenumber k, outer sources the interior field at k_minus.
ModeBlockSystem fill_transmission(const BoundaryNodes& nodes, const RingSourceSet& inner,
                                  const RingSourceSet& outer, double k, cplx k_minus,
                                  int P, int q);

/// Truncated SVD of every mode block.
class ModeBlockFactor {
 public:
  ModeBlockFactor() = default;
  ModeBlockFactor(const ModeBlockSystem& sys, double tol = 1e-10);

  int P() const { return static_cast<int>(svd_.size()); }
  int rows_per_mode() const { return rows_; }
  int cols_per_mode() const { return cols_; }
  const TruncatedSvd& block(int c) const { return svd_[c]; }

  /// Blockwise V_n s_n^+ U_n^* x. x is rows_per_mode x P (column c = mode c);
  /// the result is cols_per_mode x P.
  CMatrix apply_pinv(const CMatrix& x) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<TruncatedSvd> svd_;
};

/// Mode coefficients of ring samples: f is R x q (sample l at azimuth
/// 2 pi l/q), the result R x P with (1/q) sum_l f_l e^{-i n phi_l}.
CMatrix rhs_fourier(const CMatrix& samples, int P);

/// Boundary data of the incident wave sampled on the node rings at q = P
/// azimuths, returned as Fourier modes: Neumann -du^i/dn (M x P),
/// transmission [-u^i; -du^i/dn] (2M x P).
CMatrix incident_rhs(const BoundaryNodes& nodes, const IncidentWave& inc, BcKind bc, int P);

/// Numerical parameters of the isolated-obstacle solver.
struct MfsParams {
  int N = 150;
  int M = 0;        ///< 0 means ceil(1.2 N)
  int P = 60;
  int q = 0;        ///< 0 means chosen by suggest_q at tolerance 1e-14
  double tau = 0.1;
  double tau_minus = 0.0;  ///< interior-field sources; 0 means tau
  SourceScheme scheme = SourceScheme::complexified;
  double svd_tol = 1e-10;

  int resolved_M() const;
};

/// Geometry and sources of one obstacle, with the resolved q.
struct OneBodySetup {
  GeneratingCurve curve;
  BcKind bc;
  double k;
  cplx k_minus;
  int P, q;
  BoundaryNodes nodes;
  RingSourceSet inner;                ///< carries the exterior field
  std::optional<RingSourceSet> outer; ///< carries the interior field (transmission)
};

OneBodySetup make_setup(const GeneratingCurve& curve, BcKind bc, double k, cplx k_minus,
                        const MfsParams& params);

/// Fills the per-mode system matching a setup.
ModeBlockSystem fill_system(const OneBodySetup& setup);

/// Point sources carrying an azimuthal-mode ring expansion. coefs is N x P;
/// each ring becomes q = P points with strengths (1/q) sum_n c_n e^{i n phi_l}.
struct PointSources {
  std::vector<Vec3> points;
  std::vector<cplx> strengths;
};
PointSources ring_point_sources(const RingSourceSet& sources, const CMatrix& coefs);

/// Field (and gradient when requested) of point sources at targets.
void eval_point_sources(cplx k, const PointSources& src, const std::vector<Vec3>& targets,
                        std::vector<cplx>& values, std::vector<Vec3c>* grads = nullptr);

/// Scattered field of the ring expansion at arbitrary points (q = P).
std::vector<cplx> eval_field_onebody(const CMatrix& coefs, const RingSourceSet& sources,
                                     double k, const std::vector<Vec3>& points);

/// Field of a ring expansion at one point from q-node ring kernels; accurate
/// close to the source rings. grad receives the Cartesian gradient when set.
cplx eval_ring_accurate(const CMatrix& coefs, const RingSourceSet& src, cplx k, int q,
                        const Vec3& x, Vec3c* grad = nullptr);

/// Value and normal derivative of a ring expansion on a tensor surface grid
/// (t_i, phi_j), evaluated with accurate ring kernels using q nodes.
struct SurfaceGrid {
  int nt = 128, nphi = 128;
  std::vector<double> t;
  std::vector<double> phi;
  std::vector<PlanePoint> points, normals;
  std::vector<double> weights;  ///< rho * s * dt, per t
  double dphi = 0;
};
SurfaceGrid surface_grid(const GeneratingCurve& curve, int nt = 128, int nphi = 128);
/// Returns nt x nphi matrices of value and normal derivative.
void eval_on_surface(const SurfaceGrid& grid, const CMatrix& coefs, const RingSourceSet& src,
                     cplx k, int q, CMatrix* value, CMatrix* deriv);

struct OneBodyResult {
  CMatrix coefs;                 ///< N x P, exterior field
  std::optional<CMatrix> coefs_minus;  ///< N x P, interior field
  double eps1 = 0;
  cplx probe = 0;               ///< scattered field at the probe point
  std::optional<double> eps2;
  double coef_norm = 0;
};

/// Isolated obstacle solve by per-mode truncated-SVD least squares, with the
/// boundary-condition error on a 128 x 128 surface grid and the scattered
/// field at probe.
OneBodyResult solve_onebody(const OneBodySetup& setup, const IncidentWave& inc,
                            double svd_tol = 1e-10, Vec3 probe = Vec3(10, 10, 10));

/// Boundary-condition L2 error of a ring expansion (scattered field u plus
/// incident wave), area weighted. extra_value / extra_deriv (nt x nphi) add
/// further exterior field contributions on the grid.
double boundary_error(const OneBodySetup& setup, const IncidentWave& inc,
                      const CMatrix& coefs, const CMatrix* coefs_minus,
                      const SurfaceGrid& grid, const CMatrix* extra_value = nullptr,
                      const CMatrix* extra_deriv = nullptr);

/// Splits a stacked unknown block (cols_per_mode x P) into exterior and
/// interior coefficient matrices.
CMatrix exterior_part(const CMatrix& eta, int N);
CMatrix interior_part(const CMatrix& eta, int N);

}  // namespace qpmfs
