#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace fluctlat {

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is scaled by 2^-s so that its 1-norm is at most 1/2, the
/// series is summed until terms fall below machine epsilon relative to the
/// partial sum, and the result is squared s times.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = a.rows();
  const Scalar norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > Scalar(0.5)) squarings = static_cast<int>(std::ceil(std::log2(norm / Scalar(0.5))));
  const Mat scaled = a / std::ldexp(Scalar(1), squarings);

  Mat sum = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int k = 1; k < 64; ++k) {
    term = (term * scaled) / Scalar(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= eps * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace fluctlat
