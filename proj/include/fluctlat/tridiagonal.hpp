#pragma once

#include <Eigen/Dense>

namespace fluctlat {

/// Thomas algorithm for a tridiagonal system. `lower(i)` couples row i to
/// i-1 (lower(0) unused), `upper(i)` couples row i to i+1. No pivoting, so the
/// matrix should be diagonally dominant.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_tridiagonal(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lower,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& diag,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& upper,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs) {
  const Eigen::Index m = diag.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(m), d(m);
  c(0) = upper(0) / diag(0);
  d(0) = rhs(0) / diag(0);
  for (Eigen::Index i = 1; i < m; ++i) {
    const Scalar denom = diag(i) - lower(i) * c(i - 1);
    c(i) = i + 1 < m ? upper(i) / denom : Scalar(0);
    d(i) = (rhs(i) - lower(i) * d(i - 1)) / denom;
  }
  for (Eigen::Index i = m - 2; i >= 0; --i) d(i) -= c(i) * d(i + 1);
  return d;
}

}  // namespace fluctlat
