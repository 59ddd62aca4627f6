#include <gtest/gtest.h>

#include "algcpd/errors.hpp"
#include "algcpd/gevd.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/random.hpp"

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

TEST(GevdCpd, TwoByTwoByTwo) {
  MatrixXd A(2, 2);
  A << 1, 1, 1, 2;
  const FactorTripled truth(A, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  const auto t = synthesize(truth);
  const auto f = gevd_cpd(t, 2);
  EXPECT_LE(relative_residual(t, f), 1e-12);
  EXPECT_LE(match_factors(f, truth).max_column_angle, 1e-8);
}

TEST(GevdCpd, RandomTwoByFiveByFive) {
  Rng rng(31);
  const auto truth = random_factors(2, 5, 5, 5, rng);
  const auto f = gevd_cpd(synthesize(truth), 5);
  EXPECT_LE(match_factors(f, truth).max_column_angle, 1e-8);
}

TEST(GevdCpd, ThickerFirstModeAndLongerModes) {
  Rng rng(32);
  const auto truth = random_factors(4, 9, 7, 6, rng);
  const auto t = synthesize(truth);
  const auto f = gevd_cpd(t, 6);
  EXPECT_LE(relative_residual(t, f), 1e-10);
  EXPECT_LE(match_factors(f, truth).max_column_angle, 1e-8);
}

TEST(GevdCpd, RepeatedFirstModeColumnIsDegenerate) {
  MatrixXd A(2, 2);
  A << 1, 1, 2, 2;
  const auto t = synthesize(FactorTripled(A, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)));
  EXPECT_THROW(gevd_cpd(t, 2), Degeneracy);
}

TEST(GevdCpd, RankDeficientModeThrows) {
  Rng rng(33);
  const auto truth = random_factors(3, 4, 2, 3, rng);  // mode-3 rank 2 < R
  EXPECT_THROW(gevd_cpd(synthesize(truth), 3), RankDeficiency);
}

TEST(GevdCpd, InvariantUnderColumnRescaling) {
  Rng rng(34);
  const auto truth = random_factors(3, 6, 6, 6, rng);
  const auto base = gevd_cpd(synthesize(truth), 6);
  MatrixXd A = truth.A(), B = truth.B(), C = truth.C();
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  for (int r = 0; r < 6; ++r) {
    const double a = scale(rng), b = scale(rng);
    A.col(r) *= a;
    B.col(r) *= b;
    C.col(r) /= a * b;
  }
  const auto scaled = gevd_cpd(synthesize(FactorTripled(A, B, C)), 6);
  EXPECT_LE(match_factors(scaled, truth).max_column_angle, 1e-8);
  EXPECT_LE(match_factors(base, truth).max_column_angle, 1e-8);
}

TEST(GevdCpd, DeterministicForFixedSeed) {
  Rng rng(35);
  const auto t = synthesize(random_factors(3, 5, 5, 5, rng));
  const auto x = gevd_cpd(t, 5), y = gevd_cpd(t, 5);
  EXPECT_EQ(x.A(), y.A());
  EXPECT_EQ(x.B(), y.B());
  EXPECT_EQ(x.C(), y.C());
}

TEST(PowerRoot, UnitCube) {
  const VectorXd e1 = VectorXd::Unit(2, 0);
  const auto p = power_root(kron_power(e1, 3), 2, 3);
  EXPECT_NEAR(p.fit, 1.0, 1e-15);
  EXPECT_LT((p.f - e1).norm(), 1e-15);
}

TEST(PowerRoot, EvenPowerUpToSign) {
  VectorXd f(2);
  f << 0.6, 0.8;
  const auto p = power_root(kron_power(f, 2), 2, 2);
  EXPECT_NEAR(p.fit, 1.0, 1e-14);
  EXPECT_LT(std::min((p.f - f).norm(), (p.f + f).norm()), 1e-14);
  EXPECT_GT(p.f(1), 0.0);
}

TEST(PowerRoot, OddPowerKeepsSign) {
  VectorXd f(3);
  f << -0.3, -2.0, 0.5;
  const VectorXd v = kron_power(f, 3);
  const auto p = power_root(v, 3, 3);
  EXPECT_LT((p.f - f).norm(), 1e-13);
  EXPECT_LE((kron_power(p.f, 3) - v).norm(), 1e-10 * v.norm());
}

TEST(PowerRoot, PerturbedCube) {
  Rng rng(36);
  const VectorXd f = random_normal(4, 1, rng);
  const VectorXd v = kron_power(f, 3) + 1e-10 * random_normal(64, 1, rng);
  const auto p = power_root(v, 4, 3);
  EXPECT_LE((p.f - f).norm(), 1e-8);
}

TEST(PowerRoot, NotAPower) {
  VectorXd v = kron_power(VectorXd::Unit(3, 0), 2) + kron_power(VectorXd::Unit(3, 1), 2);
  EXPECT_THROW(power_root(v, 3, 2), NotAPower);
  EXPECT_THROW(power_root(VectorXd::Ones(7), 2, 3), InvalidArgument);
}

}  // namespace
}  // namespace algcpd
