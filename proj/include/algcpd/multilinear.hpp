#pragma once

// Dense multilinear primitives: polyadic synthesis, unfoldings, Khatri-Rao
// products, k-rank, compound matrices, rank-one extraction and mode-3
// compression. Everything here is a pure function templated on the scalar.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "algcpd/combinatorics.hpp"
#include "algcpd/errors.hpp"
#include "algcpd/svd.hpp"
#include "algcpd/tensor.hpp"

namespace algcpd {

/// Relative singular-value threshold below which a direction counts as zero.
inline constexpr double kRankTol = 1e-9;

/// Column-wise Kronecker product; column r is x_r (x) y_r, row index i*J + j.
template <typename DerivedX, typename DerivedY>
Mat<typename DerivedX::Scalar> khatri_rao(const Eigen::MatrixBase<DerivedX>& X,
                                          const Eigen::MatrixBase<DerivedY>& Y) {
  using Scalar = typename DerivedX::Scalar;
  if (X.cols() != Y.cols()) throw InvalidArgument("khatri_rao: column counts differ");
  const Eigen::Index I = X.rows(), J = Y.rows();
  Mat<Scalar> out(I * J, X.cols());
  for (Eigen::Index r = 0; r < X.cols(); ++r)
    for (Eigen::Index i = 0; i < I; ++i) out.col(r).segment(i * J, J) = X(i, r) * Y.col(r);
  return out;
}

template <typename DerivedX, typename DerivedY>
Mat<typename DerivedX::Scalar> kronecker(const Eigen::MatrixBase<DerivedX>& X,
                                         const Eigen::MatrixBase<DerivedY>& Y) {
  using Scalar = typename DerivedX::Scalar;
  Mat<Scalar> out(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      out.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
  return out;
}

/// t_ijk = sum_r A(i,r) B(j,r) C(k,r).
template <typename Scalar>
Tensor3<Scalar> synthesize(const FactorTriple<Scalar>& f) {
  Tensor3<Scalar> t(f.A().rows(), f.B().rows(), f.C().rows());
  t.unfold_r10().noalias() = khatri_rao(f.A(), f.B()) * f.C().transpose();
  return t;
}

template <typename Scalar>
Mat<Scalar> unfold_r10(const Tensor3<Scalar>& t) {
  return t.unfold_r10();
}

/// (i, j) -> sum_k t_ijk x_k.
template <typename Scalar, typename Derived>
Mat<Scalar> contract_mode3(const Tensor3<Scalar>& t, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != t.depth()) throw InvalidArgument("contract_mode3: vector length must equal K");
  Vec<Scalar> flat = t.unfold_r10() * x;
  return Eigen::Map<const RowMat<Scalar>>(flat.data(), t.rows(), t.cols());
}

/// Number of singular values above tol * sigma_max.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& X, double tol = kRankTol) {
  using Scalar = typename Derived::Scalar;
  if (X.size() == 0) return 0;
  const auto s = robust_svd(X).s;
  if (s.size() == 0 || s(0) == Scalar(0)) return 0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  return r;
}

/// Largest k such that every k columns are linearly independent.
///
/// Exhaustive over subsets; throws ResourceLimit if some level has more than
/// `max_subsets` subsets to inspect.
template <typename Derived>
int k_rank(const Eigen::MatrixBase<Derived>& X, double tol = kRankTol,
           std::uint64_t max_subsets = 10'000'000) {
  using Scalar = typename Derived::Scalar;
  const int R = static_cast<int>(X.cols());
  if (R < 1) throw InvalidArgument("k_rank: matrix has no columns");
  Mat<Scalar> Xn = X;
  for (int r = 0; r < R; ++r) {
    const Scalar n = Xn.col(r).norm();
    if (n == Scalar(0)) return 0;
    Xn.col(r) /= n;
  }
  const int kmax = static_cast<int>(std::min<Eigen::Index>(X.rows(), R));
  Mat<Scalar> sub;
  std::vector<int> c;
  for (int k = 1; k <= kmax; ++k) {
    if (binomial(R, k) > max_subsets)
      throw ResourceLimit("k_rank: too many column subsets (C(" + std::to_string(R) + "," +
                          std::to_string(k) + "))");
    c.resize(k);
    std::iota(c.begin(), c.end(), 0);
    sub.resize(Xn.rows(), k);
    while (true) {
      for (int p = 0; p < k; ++p) sub.col(p) = Xn.col(c[p]);
      Eigen::JacobiSVD<Mat<Scalar>> svd(sub);
      const auto& s = svd.singularValues();
      if (!(s(k - 1) > tol * s(0))) return k - 1;
      int i = k - 1;
      while (i >= 0 && c[i] == R - k + i) --i;
      if (i < 0) break;
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
  }
  return kmax;
}

/// m-th compound matrix: all m x m minors, index sets in lexicographic order.
template <typename Derived>
Mat<typename Derived::Scalar> compound(const Eigen::MatrixBase<Derived>& X, int m) {
  using Scalar = typename Derived::Scalar;
  if (m < 1 || m > X.rows() || m > X.cols())
    throw InvalidArgument("compound: order m must satisfy 1 <= m <= min(rows, cols)");
  const auto rsets = combinations(static_cast<int>(X.rows()), m);
  const auto csets = combinations(static_cast<int>(X.cols()), m);
  Mat<Scalar> out(static_cast<Eigen::Index>(rsets.size()), static_cast<Eigen::Index>(csets.size()));
  Mat<Scalar> sub(m, m);
  for (std::size_t a = 0; a < rsets.size(); ++a)
    for (std::size_t b = 0; b < csets.size(); ++b) {
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) sub(p, q) = X(rsets[a][p], csets[b][q]);
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sub.determinant();
    }
  return out;
}

/// Flip sign so the entry of largest magnitude is positive. Returns the sign applied.
template <typename Derived>
int fix_sign(Eigen::MatrixBase<Derived>& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) {
    v = -v;
    return -1;
  }
  return 1;
}

template <typename Scalar>
struct Rank1 {
  Vec<Scalar> u;
  Vec<Scalar> v;
  Scalar sigma;
  /// sigma / ||M||_F, equal to 1 for an exact rank-one matrix.
  Scalar fit;
};

/// Leading singular triplet; u is sign-normalized (largest entry positive).
template <typename Derived>
Rank1<typename Derived::Scalar> best_rank1(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  const Scalar fro = M.norm();
  if (!(fro > Scalar(0))) throw DegenerateInput("best_rank1: zero matrix");
  const auto svd = robust_svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Rank1<Scalar> out{svd.U.col(0), svd.V.col(0), svd.s(0), Scalar(0)};
  if (fix_sign(out.u) < 0) out.v = -out.v;
  out.fit = out.sigma / fro;
  return out;
}

template <typename Scalar>
struct Mode3Compression {
  Tensor3<Scalar> tensor;  ///< I x J x K' core
  Mat<Scalar> basis;       ///< K x K' with orthonormal columns
};

/// Projects mode 3 onto its numerical column space: t = core x_3 basis.
template <typename Scalar>
Mode3Compression<Scalar> mode3_compress(const Tensor3<Scalar>& t, double tol = kRankTol) {
  const auto svd = robust_svd(t.unfold_r10(), Eigen::ComputeThinV);
  const auto& s = svd.s;
  if (s.size() == 0 || !(s(0) > Scalar(0))) throw DegenerateInput("mode3_compress: zero tensor");
  Eigen::Index kp = 0;
  while (kp < s.size() && s(kp) > tol * s(0)) ++kp;
  Mode3Compression<Scalar> out{Tensor3<Scalar>(t.rows(), t.cols(), kp), svd.V.leftCols(kp)};
  out.tensor.unfold_r10().noalias() = t.unfold_r10() * out.basis;
  return out;
}

struct MatchReport {
  /// permutation[s] = column of `found` matched to column s of `truth`.
  std::vector<int> permutation;
  /// Per truth column: scale of found column relative to truth in modes A, B, C.
  std::vector<std::array<double, 3>> column_scales;
  double max_column_angle = 0.0;
  double relative_residual = 0.0;
};

namespace detail {

/// sin^2 of the angle between two lines, computed without cancellation.
template <typename Derived1, typename Derived2>
double line_sin2(const Eigen::MatrixBase<Derived1>& x, const Eigen::MatrixBase<Derived2>& y) {
  const Vec<double> xn = x.template cast<double>().normalized();
  const Vec<double> yn = y.template cast<double>().normalized();
  const double c = xn.dot(yn);
  const double s2 = (xn - c * yn).squaredNorm();
  return std::clamp(s2, 0.0, 1.0);
}

}  // namespace detail

/// Pairs the rank-one terms of `found` with those of `truth` and measures the
/// worst angle between matched (vectorized) rank-one tensors.
template <typename Scalar>
MatchReport match_factors(const FactorTriple<Scalar>& found, const FactorTriple<Scalar>& truth) {
  const Eigen::Index R = truth.rank();
  if (found.rank() != R || found.A().rows() != truth.A().rows() ||
      found.B().rows() != truth.B().rows() || found.C().rows() != truth.C().rows())
    throw InvalidArgument("match_factors: shapes differ");

  // sin^2 per mode for every (truth s, found r) pair.
  std::vector<std::array<double, 3>> s2(R * R);
  Mat<double> congruence(R, R);
  for (Eigen::Index s = 0; s < R; ++s)
    for (Eigen::Index r = 0; r < R; ++r) {
      auto& e = s2[s * R + r];
      e = {detail::line_sin2(found.A().col(r), truth.A().col(s)),
           detail::line_sin2(found.B().col(r), truth.B().col(s)),
           detail::line_sin2(found.C().col(r), truth.C().col(s))};
      congruence(s, r) = std::sqrt((1 - e[0]) * (1 - e[1]) * (1 - e[2]));
    }

  MatchReport rep;
  rep.permutation.assign(R, -1);
  rep.column_scales.resize(R);
  std::vector<bool> truth_used(R, false), found_used(R, false);
  for (Eigen::Index step = 0; step < R; ++step) {
    double best = -1;
    Eigen::Index bs = -1, br = -1;
    for (Eigen::Index s = 0; s < R; ++s) {
      if (truth_used[s]) continue;
      for (Eigen::Index r = 0; r < R; ++r)
        if (!found_used[r] && congruence(s, r) > best) {
          best = congruence(s, r);
          bs = s;
          br = r;
        }
    }
    truth_used[bs] = found_used[br] = true;
    rep.permutation[bs] = static_cast<int>(br);
  }

  for (Eigen::Index s = 0; s < R; ++s) {
    const Eigen::Index r = rep.permutation[s];
    const auto& e = s2[s * R + r];
    // sin^2 of the angle between the rank-one tensors: 1 - prod(1 - s_x^2).
    const double sin2 = e[0] + e[1] + e[2] - e[0] * e[1] - e[0] * e[2] - e[1] * e[2] +
                        e[0] * e[1] * e[2];
    rep.max_column_angle =
        std::max(rep.max_column_angle, std::atan2(std::sqrt(std::max(sin2, 0.0)), congruence(s, r)));
    auto scale = [&](const Mat<Scalar>& F, const Mat<Scalar>& T) {
      return static_cast<double>(F.col(r).dot(T.col(s)) / T.col(s).squaredNorm());
    };
    rep.column_scales[s] = {scale(found.A(), truth.A()), scale(found.B(), truth.B()),
                            scale(found.C(), truth.C())};
  }

  const Tensor3<Scalar> tf = synthesize(found), tt = synthesize(truth);
  const double denom = static_cast<double>(tt.norm());
  rep.relative_residual =
      static_cast<double>((tf.data() - tt.data()).norm()) / (denom > 0 ? denom : 1.0);
  return rep;
}

/// Relative Frobenius residual ||t - [[A,B,C]]|| / ||t||.
template <typename Scalar>
double relative_residual(const Tensor3<Scalar>& t, const FactorTriple<Scalar>& f) {
  const Tensor3<Scalar> s = synthesize(f);
  const double denom = static_cast<double>(t.norm());
  return static_cast<double>((t.data() - s.data()).norm()) / (denom > 0 ? denom : 1.0);
}

}  // namespace algcpd
