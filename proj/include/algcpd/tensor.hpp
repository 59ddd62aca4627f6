#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "algcpd/errors.hpp"

namespace algcpd {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense third-order tensor. Element (i, j, k) lives at flat index
/// (i*J + j)*K + k, so the IJ x K unfolding is a row-major view of the data.
template <typename Scalar>
class Tensor3 {
public:
  using Index = Eigen::Index;

  Tensor3() = default;

  Tensor3(Index I, Index J, Index K) : dims_{I, J, K}, data_(checked_size(I, J, K)) {
    data_.setZero();
  }

  Tensor3(Index I, Index J, Index K, Vec<Scalar> data) : dims_{I, J, K}, data_(std::move(data)) {
    if (data_.size() != checked_size(I, J, K))
      throw InvalidArgument("Tensor3: data length does not match I*J*K");
    if (!data_.allFinite()) throw InvalidArgument("Tensor3: non-finite entry");
  }

  Index rows() const noexcept { return dims_[0]; }
  Index cols() const noexcept { return dims_[1]; }
  Index depth() const noexcept { return dims_[2]; }
  const std::array<Index, 3>& dims() const noexcept { return dims_; }
  Index size() const noexcept { return data_.size(); }

  Scalar operator()(Index i, Index j, Index k) const { return data_[(i * dims_[1] + j) * dims_[2] + k]; }
  Scalar& operator()(Index i, Index j, Index k) { return data_[(i * dims_[1] + j) * dims_[2] + k]; }

  const Vec<Scalar>& data() const noexcept { return data_; }
  Vec<Scalar>& data() noexcept { return data_; }

  Scalar norm() const { return data_.norm(); }

  /// IJ x K matrix view, row (i*J + j), column k.
  Eigen::Map<const RowMat<Scalar>> unfold_r10() const {
    return {data_.data(), dims_[0] * dims_[1], dims_[2]};
  }
  Eigen::Map<RowMat<Scalar>> unfold_r10() { return {data_.data(), dims_[0] * dims_[1], dims_[2]}; }

  /// I x JK matrix view, column (j*K + k). Equals A * khatri_rao(B, C)^T for a PD.
  Eigen::Map<const RowMat<Scalar>> unfold_mode1() const {
    return {data_.data(), dims_[0], dims_[1] * dims_[2]};
  }

private:
  static Index checked_size(Index I, Index J, Index K) {
    if (I < 1 || J < 1 || K < 1) throw InvalidArgument("Tensor3: dimensions must be positive");
    return I * J * K;
  }

  std::array<Index, 3> dims_{0, 0, 0};
  Vec<Scalar> data_;
};

/// Factor matrices (A, B, C) of a polyadic decomposition with R terms.
template <typename Scalar>
class FactorTriple {
public:
  FactorTriple() = default;

  FactorTriple(Mat<Scalar> A, Mat<Scalar> B, Mat<Scalar> C)
      : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
    if (A_.cols() != B_.cols() || A_.cols() != C_.cols())
      throw InvalidArgument("FactorTriple: factor column counts differ");
    if (A_.cols() < 1) throw InvalidArgument("FactorTriple: rank must be positive");
    reject_zero_columns(A_, "A");
    reject_zero_columns(B_, "B");
    reject_zero_columns(C_, "C");
  }

  const Mat<Scalar>& A() const noexcept { return A_; }
  const Mat<Scalar>& B() const noexcept { return B_; }
  const Mat<Scalar>& C() const noexcept { return C_; }
  Eigen::Index rank() const noexcept { return A_.cols(); }

private:
  static void reject_zero_columns(const Mat<Scalar>& X, const char* name) {
    if (!X.allFinite()) throw InvalidArgument(std::string("FactorTriple: non-finite entry in ") + name);
    for (Eigen::Index r = 0; r < X.cols(); ++r)
      if (X.col(r).squaredNorm() == Scalar(0))
        throw InvalidArgument(std::string("FactorTriple: zero column in ") + name);
  }

  Mat<Scalar> A_, B_, C_;
};

using Tensor3d = Tensor3<double>;
using FactorTripled = FactorTriple<double>;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;

}  // namespace algcpd
