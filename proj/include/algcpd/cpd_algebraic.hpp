#pragma once

// Algebraic CPD of a third-order tensor.
//
// Phase 1 reads F off the kernel of R_{m,l}(T) on the symmetric subspace: the
// kernel is spanned by f^{(x)(m+l)} for the columns f of F, and the folded
// basis is a GEVD-solvable tensor with mode-1 factor F. Phase 2 finds C as the
// normals of the hyperplanes spanned by columns of F (C = F^{-T} when K = R),
// and phase 3 splits (A kr B) = unfold(T) F (C^T F)^+ column by column.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "algcpd/gevd.hpp"
#include "algcpd/null_intersection.hpp"
#include "algcpd/structured_maps.hpp"
#include "algcpd/tensor.hpp"

namespace algcpd {

struct CpdOptions {
  int l_max = 3;
  KernelOptions kernel;
  GramOptions gram;
  /// The auxiliary tensor inherits kernel roundoff; its own residual is checked loosely.
  PencilConfig pencil{.residual_max = 1e-6};
  double power_fit_min = 0.99;
  double rank1_fit_min = 0.999;
  /// |cos| at or below this counts as orthogonal in the hyperplane search.
  double ortho_tol = 1e-7;
  /// Relative residual above this is a verification failure.
  double residual_max = 1e-6;
  std::uint64_t seed = 1;
  std::uint64_t ransac_cap = 1'000'000;
};

/// One rejected value of l and why.
struct LAttempt {
  int l = 0;
  long kernel_dim = -1;
  std::string reason;
};

struct CpdResult {
  FactorTripled factors;
  int l_used = 0;
  int m = 0;
  Eigen::Index kernel_dim = 0;
  Eigen::Index gram_dim = 0;
  double residual = 0.0;
  /// Per-phase fit and timing numbers keyed by name.
  std::map<std::string, double> diagnostics;
  /// Values of l rejected before l_used (auto_l only).
  std::vector<LAttempt> attempts;
};

/// K = R after mode-3 compression.
CpdResult algorithm1(const Tensor3d& t, Eigen::Index R, int l, const CpdOptions& opts = {});

/// K < R after mode-3 compression, m = R - K + 2. Delegates to algorithm1 when K = R.
CpdResult algorithm2(const Tensor3d& t, Eigen::Index R, int l, const CpdOptions& opts = {});

/// Dispatches on the mode-3 rank. A rank above R is a ConditionViolation.
CpdResult decompose(const Tensor3d& t, Eigen::Index R, int l, const CpdOptions& opts = {});

/// Tries l = 0, 1, ..., opts.l_max and returns the first success.
/// If every l fails, throws ConditionViolation when all failures were condition
/// violations and VerificationFailure otherwise; the message lists each l.
CpdResult auto_l(const Tensor3d& t, Eigen::Index R, const CpdOptions& opts = {});

/// Minimum number of columns of F orthogonal to each column of C: C(R-1, K-2).
std::uint64_t hyperplane_members(Eigen::Index R, Eigen::Index K);

/// Samples drawn by the hyperplane search before giving up.
std::uint64_t ransac_budget(Eigen::Index R, Eigen::Index K, std::uint64_t cap = 1'000'000);

/// C (K x R) from F (K x C(R,K-1)) up to column order and scale.
/// Throws RecoveryFailure when fewer than R hyperplanes are found in budget.
MatrixXd recover_C_from_F(const MatrixXd& F, Eigen::Index R, double tol = 1e-7, std::uint64_t seed = 1,
                          std::uint64_t cap = 1'000'000);

/// A, B with unit-norm columns (largest entry positive) and C carrying the
/// magnitudes. t is I x J x K with the same K as C and F.
/// For K = R, A kr B = unfold(t) F (C^T F)^{-1} split column by column. For
/// K < R, a_r and b_r are the directions common to the column and row spaces
/// of every mode-3 slice t x_3 f_S with c_r not orthogonal to f_S.
/// Throws RankDeficiency when C^T F (K = R) or a slice (K < R) loses rank and
/// VerificationFailure when a fit falls below rank1_fit_min.
FactorTripled recover_AB(const Tensor3d& t, const MatrixXd& C, const MatrixXd& F, double rank1_fit_min = 0.999);

struct AlsResult {
  FactorTripled factors;
  double residual = 0.0;
  int iterations = 0;
};

/// Alternating least squares from n_inits Gaussian starts; the best run wins.
AlsResult als_baseline(const Tensor3d& t, Eigen::Index R, int n_inits, int n_iters, std::uint64_t seed);

}  // namespace algcpd
