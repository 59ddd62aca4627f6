#pragma once

// Kernel of R_{m,l}(T) restricted to the symmetric subspace, read off the
// singular values of the Gram factor, and its reshaping into the auxiliary
// tensor.

#include <vector>

#include "algcpd/structured_maps.hpp"
#include "algcpd/tensor.hpp"

namespace algcpd {

struct KernelOptions {
  /// Singular values at or below tol_kernel * sigma_max count as zero.
  double tol_kernel = 1e-12;
  /// Required ratio between the first nonzero and the last zero singular value.
  double gap_min = 1e3;
  /// Largest D handled by a full singular value decomposition.
  Eigen::Index dense_max = 3000;
};

/// Orthonormal basis of ker(G), in compressed symmetric coordinates.
struct KernelBasis {
  MatrixXd w;  ///< D x n
  Eigen::Index n = 0;
  Eigen::Index expected_n = 0;
  /// sigma_{n+1} / sigma_n; infinite when n = D.
  double gap = 0.0;
  /// Smallest singular values seen, ascending, relative to sigma_max.
  std::vector<double> spectrum_head;
};

/// Count of leading entries of an ascending spectrum at or below tol * scale,
/// and the ratio between the next entry and the last counted one. With no
/// counted entry the ratio is taken against tol * scale.
struct SpectrumSplit {
  Eigen::Index zeros = 0;
  double gap = 0.0;
};

SpectrumSplit split_spectrum(const VectorXd& ascending, double scale, double tol);

/// Extracts ker(G) from the Gram factor. Throws ConditionViolation carrying the
/// found dimension and the singular value tail when the count differs from
/// expected_n or the gap is below gap_min.
KernelBasis sym_kernel(const GramOperator& q, Eigen::Index expected_n, const KernelOptions& opts = {});

/// Same acceptance rule for a matrix given by its rows (any row count).
KernelBasis kernel_of_rows(const MatrixXd& g, Eigen::Index expected_n, const KernelOptions& opts = {});

/// Expands every kernel vector to K^n coordinates and reshapes: slice s of the
/// K x K^{n-1} x n result is the first-index matricization of w_s.
Tensor3d expand_and_fold(const KernelBasis& w, int K, int m, int l);

}  // namespace algcpd
