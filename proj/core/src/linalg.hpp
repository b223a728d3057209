// Thin wrappers over OpenBLAS/LAPACKE for the dense kernels that dominate a
// solve at L = 31. Everything is column-major, matching Eigen's default.
#ifndef PMCF_SRC_LINALG_HPP
#define PMCF_SRC_LINALG_HPP

#include <cblas.h>
#include <lapacke.h>

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "pmcf/errors.hpp"

namespace pmcf::linalg {

inline Eigen::MatrixXd multiply(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const int m = int(A.rows()), k = int(A.cols()), n = int(B.cols());
  Eigen::MatrixXd C(m, n);
  cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, m, n, k, 1.0, A.data(), m, B.data(),
              k, 0.0, C.data(), m);
  return C;
}

inline Eigen::MatrixXd multiply_at_b(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const int m = int(A.cols()), k = int(A.rows()), n = int(B.cols());
  Eigen::MatrixXd C(m, n);
  cblas_dgemm(CblasColMajor, CblasTrans, CblasNoTrans, m, n, k, 1.0, A.data(), k, B.data(), k,
              0.0, C.data(), m);
  return C;
}

inline double smallest_singular_value(Eigen::MatrixXd A) {
  const int n = int(A.rows());
  std::vector<double> sv(n);
  std::vector<double> superb(n);
  int info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'N', 'N', n, n, A.data(), n, sv.data(), nullptr,
                            1, nullptr, 1, superb.data());
  if (info != 0) throw Error("SVD failed");
  return sv[n - 1];
}

// Solves A x = b by LU with partial pivoting; A is consumed.
inline Eigen::VectorXd lu_solve(Eigen::MatrixXd A, Eigen::VectorXd b) {
  const int n = int(A.rows());
  std::vector<lapack_int> ipiv(n);
  int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, n, 1, A.data(), n, ipiv.data(), b.data(), n);
  if (info != 0) throw Error("dense LU solve failed");
  return b;
}

// Minimum-norm solve of A x = b through rank-revealing QR. Singular values
// below rcond * sigma_max are truncated, so exact kernel directions (the
// flat-space translation modes) receive no update. A is consumed.
inline Eigen::VectorXd least_squares_solve(Eigen::MatrixXd A, Eigen::VectorXd b,
                                           double rcond = 1e-12) {
  const int n = int(A.rows());
  std::vector<lapack_int> jpvt(n, 0);
  lapack_int rank = 0;
  int info = LAPACKE_dgelsy(LAPACK_COL_MAJOR, n, n, 1, A.data(), n, b.data(), n, jpvt.data(),
                            rcond, &rank);
  if (info != 0) throw Error("dense least-squares solve failed");
  return b;
}

// All eigenvalues of a symmetric matrix, ascending; A is consumed.
inline Eigen::VectorXd sym_eigenvalues(Eigen::MatrixXd A) {
  const int n = int(A.rows());
  Eigen::VectorXd w(n);
  int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', n, A.data(), n, w.data());
  if (info != 0) throw Error("symmetric eigensolve failed");
  return w;
}

// Eigenvalues of a general real matrix; A is consumed.
inline std::vector<std::complex<double>> eigenvalues(Eigen::MatrixXd A) {
  const int n = int(A.rows());
  std::vector<double> wr(n), wi(n);
  int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, wr.data(), wi.data(),
                           nullptr, 1, nullptr, 1);
  if (info != 0) throw Error("eigensolve failed");
  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

// Cholesky factor (lower) in place; A must be SPD.
inline Eigen::MatrixXd cholesky_lower(Eigen::MatrixXd A) {
  const int n = int(A.rows());
  int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, A.data(), n);
  if (info != 0) throw Error("Cholesky failed: matrix not positive definite");
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i) A(i, j) = 0.0;
  return A;
}

}  // namespace pmcf::linalg

#endif
