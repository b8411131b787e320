#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qpmfs/linalg.hpp"
#include "qpmfs/onebody.hpp"
#include "qpmfs/periodizer.hpp"
#include "qpmfs/summation.hpp"

namespace qpmfs {

struct GmresResult {
  CVector x;
  std::vector<double> history;  ///< relative residual after each iteration
  int iterations = 0;
  bool converged = false;
};

/// Unrestarted GMRES with modified Gram-Schmidt and one reorthogonalization
/// pass; stops when ||b - A x|| <= tol ||b||.
GmresResult gmres(const std::function<CVector(const CVector&)>& op, const CVector& b,
                  double tol, int maxit);

/// Numerical parameters of the periodic solver.
struct PeriodicParams {
  MfsParams mfs;
  int p = 24;            ///< spherical-harmonic degree of the auxiliary basis
  int N0 = 13;           ///< Rayleigh-Bloch cutoff
  int M1 = 0;            ///< wall nodes per direction; 0 means ceil(4k/pi)
  double z0 = 0.0;       ///< cell half-height; 0 means default_z0
  AuxKind aux = AuxKind::spherical_harmonics;
  int N2 = 0;            ///< proxy points per longitude line
  double proxy_R = 3.5;  ///< proxy sphere radius
  double gmres_tol = 1e-12;
  int maxit = 300;
  double q_svd_tol = 1e-15;  ///< relative truncation for the pseudoinverse of Q
  std::string backend = "direct";
};

struct Timings {
  double fill = 0, factor = 0, solve = 0;
};

struct SolveResult {
  CMatrix eta;  ///< cols_per_mode x P; exterior rows first
  CVector d, a, b;
  int iterations = 0;
  double residual = 0;
  std::vector<double> history;
  bool converged = false;
  Timings timings;
};

/// Proxy points on a sphere of radius R along N2 longitude lines, N2 points
/// each at polar angles pi (i - 1/2) / N2.
std::vector<Vec3> proxy_points(int N2, double R);

/// Periodized problem: the one-body MFS blocks, near-image operator, and the
/// wall-matching matrices B, C, Q with their factorizations. Parameters can
/// be changed with update(), which rebuilds only the dependent parts.
class PeriodicProblem {
 public:
  PeriodicProblem(GeneratingCurve curve, BcKind bc, IncidentWave inc, Lattice lattice,
                  PeriodicParams params);

  void update(const PeriodicParams& params);
  SolveResult solve() const;

  const OneBodySetup& setup() const { return *setup_; }
  const UnitCell& cell() const { return cell_; }
  const AuxBasis& aux() const { return aux_; }
  const RayleighBlochSet& rb() const { return rb_; }
  const BlochPhases& phases() const { return phases_; }
  const IncidentWave& incident() const { return inc_; }
  const Lattice& lattice() const { return lattice_; }
  const PeriodicParams& params() const { return params_; }
  BcKind bc() const { return bc_; }
  double k() const { return inc_.k(); }
  int N() const { return static_cast<int>(setup_->inner.size()); }
  int P() const { return setup_->P; }
  int rows_per_mode() const { return factor_.rows_per_mode(); }
  const ModeBlockFactor& A0() const { return factor_; }
  const CMatrix& B() const { return B_; }
  const CMatrix& C() const { return C_; }
  const CMatrix& Q() const { return Q_; }
  const TruncatedSvd& Qsvd() const { return Qsvd_; }
  const SummationBackend& backend() const { return *backend_; }
  const CMatrix& rhs() const { return rhs_; }
  Timings build_timings() const { return build_; }
  /// Seconds spent in the last SVD of Q.
  double q_factor_seconds() const { return q_factor_seconds_; }

  /// Near-image boundary data of the exterior coefficients (N x P):
  /// rows_per_mode x P mode coefficients.
  CMatrix apply_else(const CMatrix& ext) const;
  /// Same through the direct backend regardless of the configured one.
  CMatrix apply_else_direct(const CMatrix& ext) const;

  /// Point sources of the 8 near images for exterior coefficients.
  PointSources image_sources(const CMatrix& ext, bool include_center) const;

  /// Scattered field and gradient at points inside the slab |z| <= z0 of the
  /// central cell from the near images and auxiliary basis.
  void eval_cell(const SolveResult& res, std::span<const Vec3> points, std::vector<cplx>& u,
                 std::vector<Vec3c>* grad) const;

  /// Scattered field anywhere outside the obstacles: lattice reduction into
  /// the central column, Rayleigh-Bloch expansions above and below.
  std::vector<cplx> eval_field(const SolveResult& res, std::span<const Vec3> points) const;
  /// Field at points inside the central obstacle (transmission only).
  std::vector<cplx> eval_interior(const SolveResult& res, std::span<const Vec3> points) const;
  /// True when x lies inside the central obstacle.
  bool inside_obstacle(const Vec3& x) const;

 private:
  void build_onebody();
  void build_walls();
  void build_aux();
  void build_rhs();

  GeneratingCurve curve_;
  BcKind bc_;
  IncidentWave inc_;
  Lattice lattice_;
  PeriodicParams params_;
  BlochPhases phases_;
  std::optional<OneBodySetup> setup_;
  ModeBlockFactor factor_;
  UnitCell cell_;
  AuxBasis aux_;
  RayleighBlochSet rb_;
  CMatrix B_, C_, Q_, rhs_;
  TruncatedSvd Qsvd_;
  std::unique_ptr<SummationBackend> backend_;
  std::vector<Vec3> ring_targets_, ring_normals_;
  Timings build_;
  double q_factor_seconds_ = 0;
};

}  // namespace qpmfs
