#pragma once

#include <string>
#include <vector>

#include "qpmfs/solver.hpp"

namespace qpmfs {

struct BasisRow {
  std::string basis;  ///< "sph" or "proxy"
  int size;           ///< p or N2
  int unknowns;       ///< (p+1)^2 or N2^2
  double eps_per, eps_flux;
  double q_factor_seconds;
  cplx probe;
  int iterations;
};

struct BasisComparison {
  std::vector<BasisRow> rows;
  Vec3 probe;
  std::string note;  ///< set when the requested probe had to be moved
};

/// Moves a probe point lying inside the central obstacle outward along its
/// ray until it is exterior; returns the point and an explanatory note.
Vec3 exterior_probe(const PeriodicProblem& pb, const Vec3& probe, std::string* note);

/// Solves with the spherical-harmonic basis for each p and the proxy basis
/// for each N2 (other parameters fixed), recording errors, the Q
/// factorization time and the scattered field at the probe.
BasisComparison compare_bases(PeriodicProblem& pb, const std::vector<int>& p_values,
                              const std::vector<int>& N2_values,
                              const Vec3& probe = Vec3(0.9, 0.9, 0.9));

/// Smallest size in the sweep whose eps_per is at or below target for
/// the given basis; -1 when none is.
int matched_size(const BasisComparison& cmp, const std::string& basis, double target);

}  // namespace qpmfs
