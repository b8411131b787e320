#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qpmfs/solver.hpp"

namespace qpmfs {

/// Boundary-condition L2 error on the 128 x 128 (t, phi) surface grid,
/// including near-image and auxiliary contributions.
double eps_bc(const PeriodicProblem& pb, const SolveResult& res, int nt = 128, int nphi = 128);

/// Side-wall quasi-periodicity errors: value and normal-derivative
/// discrepancies u_R - alpha u_L and u_F - beta u_B in area-weighted L2.
struct PeriodicityError {
  double total = 0;
  double lr = 0, bf = 0;
  double wall_norm = 0;  ///< L2 norm of u over the L and B test nodes
};

/// Field callback: values and gradients at points.
using FieldFn = std::function<void(std::span<const Vec3>, std::vector<cplx>&, std::vector<Vec3c>&)>;

PeriodicityError eps_per_field(const UnitCell& test_cell, const BlochPhases& ph,
                               const FieldFn& field);
/// Evaluated on panel-midpoint test nodes with M1_test per direction
/// (0 means the collocation M1).
PeriodicityError eps_per(const PeriodicProblem& pb, const SolveResult& res, int M1_test = 0);

struct FluxError {
  double value = 0;
  bool no_propagating = false;
};
/// |sum_prop kz (|a|^2 + |b + delta_00 A e^{i kz z0}|^2) - kz_00 |A|^2| for
/// incident amplitude A.
FluxError eps_flux(const RayleighBlochSet& rb, const CVector& a, const CVector& b, double z0,
                   double amplitude = 1.0);
FluxError eps_flux(const PeriodicProblem& pb, const SolveResult& res);

struct WoodMode {
  int m, n;
  double margin;  ///< |kz| / k
};
struct WoodReport {
  std::vector<WoodMode> modes;  ///< orders below the margin tolerance
  double min_margin = 0;        ///< over all orders
  bool hard = false;            ///< some kz vanishes to rounding
  double digits_lost = 0;       ///< -log10(min margin) / 2, advisory
  std::string note;
};
WoodReport wood_check(const IncidentWave& inc, const Lattice& lattice, double margin_tol = 1e-3);

struct ErrorReport {
  double eps_bc = 0;
  PeriodicityError per;
  FluxError flux;
  double wood_margin = 0;
};
ErrorReport error_report(const PeriodicProblem& pb, const SolveResult& res);

struct ScanRow {
  std::string param;
  double value;
  double eps_bc, eps_per, eps_flux;
  int iters;
  double seconds;
};
/// Re-solves with one of N, P, q, p, N0, M1 set to each value in turn.
std::vector<ScanRow> scan(PeriodicProblem& pb, const std::string& param,
                          const std::vector<int>& values);
void set_param(PeriodicParams& params, const std::string& name, int value);

}  // namespace qpmfs
