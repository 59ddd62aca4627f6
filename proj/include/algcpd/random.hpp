#pragma once

#include <cstdint>
#include <random>

#include "algcpd/tensor.hpp"

namespace algcpd {

using Rng = std::mt19937_64;

/// Matrix with independent N(0, 1) entries.
inline MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd X(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = nd(rng);
  return X;
}

inline FactorTripled random_factors(Eigen::Index I, Eigen::Index J, Eigen::Index K, Eigen::Index R, Rng& rng) {
  MatrixXd A = random_normal(I, R, rng);
  MatrixXd B = random_normal(J, R, rng);
  MatrixXd C = random_normal(K, R, rng);
  return {std::move(A), std::move(B), std::move(C)};
}

/// splitmix64 step; used to derive independent per-trial seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace algcpd
