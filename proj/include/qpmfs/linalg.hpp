#pragma once

#include "qpmfs/types.hpp"

namespace qpmfs {

/// Thin SVD A = U diag(s) V^* with singular values below rel_tol * s_max
/// dropped. The pseudoinverse is only ever applied as V (s^+ (U^* x)).
class TruncatedSvd {
 public:
  TruncatedSvd() = default;
  TruncatedSvd(const CMatrix& a, double rel_tol);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int rank() const { return static_cast<int>(sinv_.size()); }
  const Eigen::VectorXd& singular_values() const { return s_; }
  double rel_tol() const { return tol_; }

  CVector apply_pinv(const CVector& x) const;
  /// Column-by-column V s^+ U^* X.
  CMatrix apply_pinv(const CMatrix& x) const;

 private:
  int rows_ = 0, cols_ = 0;
  double tol_ = 0.0;
  CMatrix u_;   // rows x rank
  CMatrix v_;   // cols x rank
  Eigen::VectorXd s_;
  Eigen::VectorXd sinv_;
};

}  // namespace qpmfs
