#pragma once

// Combinatorial index machinery and the three structured matrices built from
// a tensor (R_{m,l}), from the first two factors (Phi_{m,l}) and from the
// third factor (S_{m+l}), plus the streaming Gram restriction of R_{m,l} to
// the symmetric subspace.
//
// Conventions: all indices are zero-based. A row of R_{m,l} or Phi_{m,l} is
// addressed by an i-tuple and a j-tuple of length n = m + l, flattened
// big-endian: row = itilde * J^n + jtilde with itilde = sum_p i_p I^(n-1-p).
// Columns of R_{m,l} use the same big-endian flattening of a k-tuple.

#include <cstdint>
#include <vector>

#include "algcpd/tensor.hpp"

namespace algcpd {

/// Nondecreasing (m+l)-tuple over {0..R-1} with at least m distinct values.
struct SymTupleIndex {
  std::vector<int> tuple;
  int distinct_count = 0;
};

/// M(m, l, R): number of column tuples of Phi_{m,l} and S_{m+l}.
std::uint64_t tuple_count(int m, int l, int R);

/// Column tuples of Phi_{m,l}(A,B) / S_{m+l}(C) in lexicographic order.
std::vector<SymTupleIndex> enumerate_tuples(int m, int l, int R);

/// Basis element of the symmetric subspace S^n(R^{K^n}).
struct SymMultiset {
  std::vector<int> multiset;
  std::vector<int> multiplicity;  ///< count of each value 0..K-1
  double weight = 1.0;            ///< sqrt(number of distinct orderings)
};

/// Orthonormal basis of the symmetric subspace of (R^K)^{(x) n}.
///
/// Basis vector e_mu is the sum of the unit vectors at every distinct ordering
/// of the multiset mu, divided by sqrt(#orderings).
class SymmetricBasis {
public:
  SymmetricBasis(int K, int degree);

  int K() const noexcept { return K_; }
  int degree() const noexcept { return degree_; }
  Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(elements_.size()); }
  Eigen::Index full_dim() const noexcept { return static_cast<Eigen::Index>(full_to_compressed_.size()); }

  const SymMultiset& element(Eigen::Index idx) const { return elements_.at(idx); }
  std::uint32_t compressed_index(Eigen::Index full) const { return full_to_compressed_[full]; }

  /// Full K^n coordinates of a vector given in basis coordinates.
  VectorXd expand(const VectorXd& w) const;
  /// Basis coordinates of (the orthogonal projection of) a full vector.
  VectorXd compress(const VectorXd& x) const;
  /// The K^n x D isometry P.
  MatrixXd matrix() const;

private:
  int K_;
  int degree_;
  std::vector<SymMultiset> elements_;
  std::vector<std::uint32_t> full_to_compressed_;
};

/// Dense-assembly guard shared by build_rml and phi (number of stored entries).
inline constexpr std::size_t kMaxDenseEntries = std::size_t{1} << 25;

/// R_{m,l}(T) assembled entrywise from its definition (I^n J^n x K^n).
/// Intended as a reference for small sizes.
MatrixXd build_rml(const Tensor3d& t, int m, int l, std::size_t max_entries = kMaxDenseEntries);

/// Phi_{m,l}(A, B), I^n J^n x M(m,l,R). Each entry is (1/m!)^2 times a sum over the
/// distinct orderings s of the column tuple of det A[i,s] det B[j,s] times the tail
/// products, so that R_{m,l}(T) = Phi_{m,l}(A,B) S_{m+l}(C)^T holds exactly.
MatrixXd phi(const MatrixXd& A, const MatrixXd& B, int m, int l,
             std::size_t max_entries = kMaxDenseEntries);

/// Phi_{m,l}(A, B) with zero rows and sign/permutation duplicates removed.
/// Each kept row is scaled by sqrt(multiplicity), so compact^T compact equals
/// phi^T phi. Rows: C(I,m) C(J,m) C(IJ+l-1, l).
MatrixXd phi_compact(const MatrixXd& A, const MatrixXd& B, int m, int l,
                     std::size_t max_entries = kMaxDenseEntries);

/// S_{m+l}(C), K^n x M(m,l,R): symmetrized Kronecker products of C's columns.
MatrixXd s_matrix(const MatrixXd& C, int m, int l, std::size_t max_entries = kMaxDenseEntries);

struct GramOptions {
  /// Largest admissible dim of the symmetric subspace.
  Eigen::Index max_dim = 20000;
  /// Worker threads for the row-group reduction (1 = sequential).
  int threads = 1;
};

/// Q = G^T G with G = R_{m,l}(T) P, P the SymmetricBasis isometry, held as
/// its upper triangular factor r (Q = r^T r). The singular values of r are
/// those of G, so small ones survive that would drown in roundoff of Q.
struct GramOperator {
  MatrixXd r;
  int m = 0;
  int l = 0;
  int K = 0;
  /// Nonredundant row groups that were accumulated.
  std::uint64_t row_groups = 0;

  Eigen::Index dim() const noexcept { return r.cols(); }
  MatrixXd q() const { return r.transpose() * r; }
};

/// Dimension of the symmetric subspace, C(K+n-1, n).
std::uint64_t sym_dim(int K, int n);

/// Streams the nonredundant rows of R_{m,l}(T) P into the factor of Q without forming R.
GramOperator build_sym_gram(const Tensor3d& t, int m, int l, const GramOptions& opts = {});

/// The nonredundant weighted rows G (rows x D) themselves; G^T G equals
/// build_sym_gram(t, m, l).q(). Small sizes only.
MatrixXd sym_rml_rows(const Tensor3d& t, int m, int l, std::size_t max_entries = kMaxDenseEntries);

}  // namespace algcpd
