#pragma once

#include <vector>

#include "qpmfs/special_functions.hpp"
#include "qpmfs/types.hpp"

namespace qpmfs {

/// Spherical Hankel functions h_l = j_l + i y_l, l = 0..lmax, x > 0.
void spherical_hankel(int lmax, double x, std::vector<cplx>& out);

/// Regular spherical waves j_l(k|x|) Y_lm(x^) for l <= L, packed by lm_index,
/// with optional Cartesian gradients. Buffers are reused between calls.
class RegularWaves {
 public:
  RegularWaves(double k, int L) : k_(k), L_(L) {}
  int degree() const { return L_; }
  int count() const { return special::lm_count(L_); }
  void eval(const Vec3& x, bool gradients);

  std::vector<cplx> value;
  std::vector<Vec3c> grad;

 private:
  double k_;
  int L_;
  special::Harmonics h_;
  std::vector<double> j_;
};

/// conj(Y_lm(y^)) h_l(k|y|) for l <= L: the outgoing factor of the
/// addition theorem G(x, y) = ik sum j_l(k|x|) Y_lm(x^) h_l(k|y|) conj(Y_lm(y^)).
class OutgoingFactors {
 public:
  OutgoingFactors(double k, int L) : k_(k), L_(L) {}
  void eval(const Vec3& y);
  std::vector<cplx> value;

 private:
  double k_;
  int L_;
  special::Harmonics h_;
  std::vector<cplx> hl_;
};

}  // namespace qpmfs
