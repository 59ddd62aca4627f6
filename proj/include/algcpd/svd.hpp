#pragma once

#include <Eigen/SVD>

#include "algcpd/tensor.hpp"

namespace algcpd {

template <typename Scalar>
struct SvdResult {
  Vec<Scalar> s;  ///< descending
  Mat<Scalar> U;  ///< empty unless requested
  Mat<Scalar> V;  ///< empty unless requested
};

/// Divide-and-conquer SVD with a one-sided Jacobi fallback. Eigen's BDCSVD
/// occasionally returns NaN on well-conditioned input; any non-finite output
/// triggers the Jacobi recomputation, so the result is always finite for
/// finite input.
template <typename Derived>
SvdResult<typename Derived::Scalar> robust_svd(const Eigen::MatrixBase<Derived>& X, unsigned int options = 0) {
  using Scalar = typename Derived::Scalar;
  using M = Mat<Scalar>;
  const M x = X.eval();
  SvdResult<Scalar> out;
  const bool want_u = options & (Eigen::ComputeThinU | Eigen::ComputeFullU);
  const bool want_v = options & (Eigen::ComputeThinV | Eigen::ComputeFullV);
  {
    Eigen::BDCSVD<M> svd(x, options);
    out.s = svd.singularValues();
    if (want_u) out.U = svd.matrixU();
    if (want_v) out.V = svd.matrixV();
  }
  if (out.s.allFinite() && out.U.allFinite() && out.V.allFinite()) return out;
  Eigen::JacobiSVD<M> svd(x, options);
  out.s = svd.singularValues();
  out.U = want_u ? M(svd.matrixU()) : M();
  out.V = want_v ? M(svd.matrixV()) : M();
  return out;
}

}  // namespace algcpd
