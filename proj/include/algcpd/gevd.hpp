#pragma once

// Base-case solver for tensors whose mode-2 and mode-3 factors have full
// column rank: the eigenvectors of a quotient of two random slice mixtures
// give the mode-2 factor, and each eigen-row splits into a rank-one pair.

#include <cstdint>

#include "algcpd/tensor.hpp"

namespace algcpd {

struct PencilConfig {
  std::uint64_t mixing_seed = 0x9e3779b97f4a7c15ull;
  int max_retries = 5;
  /// Minimum pairwise eigenvalue distance, relative to the largest magnitude.
  double eig_sep_min = 1e-6;
  /// Imaginary parts above this fraction of the spectral radius are complex.
  double imag_tol = 1e-8;
  /// Relative reconstruction error accepted on output.
  double residual_max = 1e-8;
};

/// R-term decomposition of w (P x Q x N). Throws RankDeficiency when a
/// compressed mode has rank below R or the second mixture stays singular,
/// Degeneracy when eigenvalues keep colliding, ComplexEigenvalues when the
/// pencil keeps returning complex pairs and VerificationFailure when the
/// reconstruction misses residual_max.
FactorTripled gevd_cpd(const Tensor3d& w, Eigen::Index R, const PencilConfig& cfg = {});

struct PowerRoot {
  VectorXd f;
  /// sigma_1 / ||v|| of the K x K^{n-1} matricization.
  double fit = 0.0;
};

/// f with f^{(x)n} closest to v. For odd n the sign makes <f^{(x)n}, v> positive;
/// for even n the largest-magnitude entry of f is positive.
/// Throws NotAPower when fit < min_fit.
PowerRoot power_root(const VectorXd& v, int K, int n, double min_fit = 0.99);

}  // namespace algcpd
