#include "qpmfs/linalg.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <string>

namespace qpmfs {

TruncatedSvd::TruncatedSvd(const CMatrix& a, double rel_tol)
    : rows_(static_cast<int>(a.rows())), cols_(static_cast<int>(a.cols())), tol_(rel_tol) {
  const int m = rows_, n = cols_;
  const int mn = std::min(m, n);
  if (mn == 0) return;
  CMatrix work = a;
  Eigen::VectorXd s(mn);
  CMatrix u(m, mn), vt(mn, n);
  const lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, s.data(), u.data(), m,
                     vt.data(), mn);
  if (info != 0)
    throw NumericalError("zgesdd failed with info=" + std::to_string(info));
  s_ = s;
  int r = 0;
  const double cut = rel_tol * s(0);
  while (r < mn && s(r) > cut && s(r) > 0.0) ++r;
  u_ = u.leftCols(r);
  v_ = vt.topRows(r).adjoint();
  sinv_ = s.head(r).cwiseInverse();
}

CVector TruncatedSvd::apply_pinv(const CVector& x) const {
  if (x.size() != rows_) throw InputError("apply_pinv: length mismatch");
  if (rank() == 0) return CVector::Zero(cols_);
  CVector y = u_.adjoint() * x;
  y.array() *= sinv_.array();
  return v_ * y;
}

CMatrix TruncatedSvd::apply_pinv(const CMatrix& x) const {
  if (x.rows() != rows_) throw InputError("apply_pinv: length mismatch");
  if (rank() == 0) return CMatrix::Zero(cols_, x.cols());
  CMatrix y = u_.adjoint() * x;
  y = sinv_.asDiagonal() * y;
  return v_ * y;
}

}  // namespace qpmfs
