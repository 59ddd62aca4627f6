#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>
#include <limits>

#include "algcpd/errors.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/null_intersection.hpp"
#include "algcpd/random.hpp"
#include "test_support.hpp"

namespace algcpd {
namespace {

VectorXd kron_power(const VectorXd& f, int n) {
  VectorXd out = VectorXd::Ones(1);
  for (int p = 0; p < n; ++p) {
    VectorXd next(out.size() * f.size());
    for (Eigen::Index a = 0; a < out.size(); ++a) next.segment(a * f.size(), f.size()) = out(a) * f;
    out = next;
  }
  return out;
}

// Distance of x from span(w), relative to |x|; w orthonormal.
double off_span(const MatrixXd& w, const VectorXd& x) {
  return (x - w * (w.transpose() * x)).norm() / x.norm();
}

MatrixXd projector(const MatrixXd& w) { return w * w.transpose(); }

struct Instance {
  FactorTripled truth;
  Tensor3d t;
};

Instance generic(int I, int J, int K, int R, std::uint64_t seed) {
  Rng rng(seed);
  Instance out;
  out.truth = random_factors(I, J, K, R, rng);
  out.t = synthesize(out.truth);
  return out;
}

TEST(SplitSpectrum, CountsAndGap) {
  VectorXd s(4);
  s << 1e-17, 2e-16, 1e-3, 1.0;
  const auto a = split_spectrum(s, 1.0, 1e-12);
  EXPECT_EQ(a.zeros, 2);
  EXPECT_NEAR(a.gap, 1e-3 / 2e-16, 1.0);
  const auto none = split_spectrum(s.tail(2), 1.0, 1e-12);
  EXPECT_EQ(none.zeros, 0);
  EXPECT_NEAR(none.gap, 1e9, 1e-3);
  const auto all = split_spectrum(VectorXd::Zero(3), 1.0, 1e-12);
  EXPECT_EQ(all.zeros, 3);
  EXPECT_TRUE(std::isinf(all.gap));
}

TEST(SymKernel, GenericSmallFindsPowersOfInverseTranspose) {
  const auto in = generic(3, 3, 4, 4, 21);
  const auto g = build_sym_gram(in.t, 2, 0);
  const auto kb = sym_kernel(g, 4);
  EXPECT_EQ(kb.n, 4);
  EXPECT_GE(kb.gap, 1e3);
  EXPECT_LT((kb.w.transpose() * kb.w - MatrixXd::Identity(4, 4)).norm(), 1e-12);
  const MatrixXd F = in.truth.C().transpose().inverse();
  const SymmetricBasis basis(4, 2);
  for (int r = 0; r < 4; ++r) EXPECT_LT(off_span(kb.w, basis.compress(kron_power(F.col(r), 2))), 1e-9);
}

TEST(SymKernel, RejectsWhenKernelTooLarge) {
  const auto in = generic(3, 7, 12, 12, 22);
  const auto g0 = build_sym_gram(in.t, 2, 0);
  try {
    sym_kernel(g0, 12);
    FAIL() << "expected ConditionViolation";
  } catch (const ConditionViolation& e) {
    EXPECT_GT(e.found_dim(), 12);
    EXPECT_FALSE(e.eigen_tail().empty());
  }
  const auto g1 = build_sym_gram(in.t, 2, 1);
  const auto kb = sym_kernel(g1, 12);
  EXPECT_EQ(kb.n, 12);
  const MatrixXd F = in.truth.C().transpose().inverse();
  const SymmetricBasis basis(12, 3);
  for (int r = 0; r < 12; ++r) EXPECT_LT(off_span(kb.w, basis.compress(kron_power(F.col(r), 3))), 1e-6);
}

TEST(SymKernel, ZeroOperator) {
  GramOperator g;
  g.r = MatrixXd::Zero(10, 10);
  g.m = 2;
  g.K = 4;
  const auto kb = sym_kernel(g, 10);
  EXPECT_EQ(kb.n, 10);
  EXPECT_TRUE(std::isinf(kb.gap));
  try {
    sym_kernel(g, 3);
    FAIL() << "expected ConditionViolation";
  } catch (const ConditionViolation& e) {
    EXPECT_EQ(e.found_dim(), 10);
  }
}

TEST(SymKernel, ExpectedOutOfRange) {
  GramOperator g;
  g.r = MatrixXd::Identity(5, 5);
  EXPECT_THROW(sym_kernel(g, 6), InvalidArgument);
  EXPECT_THROW(sym_kernel(g, -1), InvalidArgument);
  g.r = MatrixXd::Identity(5, 4);
  EXPECT_THROW(sym_kernel(g, 1), InvalidArgument);
}

TEST(SymKernel, IterativePathMatchesDense) {
  for (const auto& [I, J, K, l, seed] :
       std::vector<std::tuple<int, int, int, int, int>>{{3, 4, 6, 0, 23}, {3, 5, 8, 0, 24}, {3, 7, 12, 1, 25}}) {
    const auto in = generic(I, J, K, K, seed);
    const auto g = build_sym_gram(in.t, 2, l);
    const auto dense = sym_kernel(g, K);
    KernelOptions iter;
    iter.dense_max = 1;
    const auto it = sym_kernel(g, K, iter);
    EXPECT_EQ(it.n, K);
    EXPECT_LT((projector(it.w) - projector(dense.w)).norm(), 1e-6) << I << "x" << J << "x" << K;
  }
}

TEST(KernelOfRows, KnownNullSpace) {
  Rng rng(26);
  const MatrixXd basis = random_normal(7, 3, rng);
  // Rows orthogonal to a known 3-dimensional subspace.
  Eigen::FullPivLU<MatrixXd> lu(basis.transpose());
  const MatrixXd perp = lu.kernel();  // 7 x 4
  const MatrixXd g = random_normal(9, 4, rng) * perp.transpose();
  const auto kb = kernel_of_rows(g, 3);
  EXPECT_EQ(kb.n, 3);
  for (int c = 0; c < 3; ++c) EXPECT_LT(off_span(kb.w, basis.col(c)), 1e-12);
  EXPECT_THROW(kernel_of_rows(g, 2), ConditionViolation);
}

TEST(ExpandAndFold, ShapesAndSymmetry) {
  const auto in = generic(3, 3, 4, 4, 27);
  const auto kb = sym_kernel(build_sym_gram(in.t, 2, 0), 4);
  const auto w = expand_and_fold(kb, 4, 2, 0);
  EXPECT_EQ(w.dims(), (std::array<Eigen::Index, 3>{4, 4, 4}));
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) EXPECT_NEAR(w(a, b, s), w(b, a, s), 1e-14);
  // Each slice has unit Frobenius norm since the basis is an isometry.
  for (int s = 0; s < 4; ++s) {
    double sq = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) sq += w(a, b, s) * w(a, b, s);
    EXPECT_NEAR(sq, 1.0, 1e-12);
  }
  EXPECT_THROW(expand_and_fold(kb, 4, 2, 1), InvalidArgument);
}

TEST(ExpandAndFold, CubicShapeAndPermutationInvariance) {
  const auto in = generic(3, 7, 12, 12, 28);
  const auto kb = sym_kernel(build_sym_gram(in.t, 2, 1), 12);
  const auto w = expand_and_fold(kb, 12, 2, 1);
  EXPECT_EQ(w.dims(), (std::array<Eigen::Index, 3>{12, 144, 12}));
  Rng rng(29);
  std::uniform_int_distribution<int> pick(0, 11);
  for (int trial = 0; trial < 50; ++trial) {
    const int a = pick(rng), b = pick(rng), c = pick(rng), s = pick(rng);
    const double v = w(a, b * 12 + c, s);
    EXPECT_NEAR(v, w(b, a * 12 + c, s), 1e-14);
    EXPECT_NEAR(v, w(c, b * 12 + a, s), 1e-14);
    EXPECT_NEAR(v, w(a, c * 12 + b, s), 1e-14);
  }
}

}  // namespace
}  // namespace algcpd
