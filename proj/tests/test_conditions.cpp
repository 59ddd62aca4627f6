#include <gtest/gtest.h>

#include <Eigen/LU>

#include "algcpd/conditions.hpp"
#include "algcpd/errors.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/random.hpp"
#include "test_support.hpp"

namespace algcpd {
namespace {

TEST(Kruskal, Arithmetic) {
  Rng rng(71);
  EXPECT_TRUE(check_kruskal(random_factors(3, 3, 3, 3, rng)));
  EXPECT_FALSE(check_kruskal(random_factors(3, 3, 3, 5, rng)));
  // k-ranks 3,3,4 at R = 4: 10 <= 10.
  EXPECT_TRUE(check_kruskal(random_factors(3, 3, 4, 4, rng)));
}

TEST(Kruskal, DuplicateColumnLowersSum) {
  Rng rng(72);
  auto f = random_factors(4, 4, 4, 4, rng);
  EXPECT_TRUE(check_kruskal(f));  // 10 <= 12
  MatrixXd A = f.A();
  A.col(1) = A.col(0);
  const FactorTripled g(A, f.B(), f.C());
  EXPECT_EQ(k_rank(A), 1);
  EXPECT_FALSE(check_kruskal(g));  // 10 > 1 + 4 + 4
}

TEST(PhiU, AgreesWithCompoundTest) {
  Rng rng(73);
  int positives = 0, negatives = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int R = 3 + trial % 4;  // 3..6
    auto f = random_factors(3, 3, R, R, rng);
    if (trial % 5 == 1) {
      MatrixXd A = f.A();
      A.col(2) = -1.5 * A.col(0);
      f = FactorTripled(A, f.B(), f.C());
    }
    if (trial % 7 == 3) {
      MatrixXd B = f.B();
      B.row(2) = B.row(0) + B.row(1);  // rank-2 B: every 2x2 minor set is constrained
      f = FactorTripled(f.A(), B, f.C());
    }
    const bool oracle = testing::oracle_compound2(f.A(), f.B());
    EXPECT_EQ(check_phi_u(f, 2, 0), oracle) << "trial " << trial;
    EXPECT_EQ(check_compound2(f), oracle) << "trial " << trial;
    (oracle ? positives : negatives)++;
  }
  EXPECT_GT(positives, 10);
  EXPECT_GT(negatives, 10);
}

TEST(PhiU, RepeatedColumnFails) {
  Rng rng(74);
  auto f = random_factors(4, 4, 4, 4, rng);
  MatrixXd A = f.A();
  A.col(3) = A.col(1);
  EXPECT_FALSE(check_phi_u(FactorTripled(A, f.B(), f.C()), 2, 0));
  EXPECT_TRUE(check_phi_u(f, 2, 0));
}

TEST(PhiU, FirstOrderIsKhatriRaoOnRowSpace) {
  Rng rng(75);
  const auto f = random_factors(2, 2, 3, 5, rng);  // A kr B is 4 x 5, range(C^T) has dimension 3
  EXPECT_TRUE(check_phi_u(f, 1, 0));
  const auto g = random_factors(2, 2, 5, 5, rng);  // range(C^T) has dimension 5 > 4
  EXPECT_FALSE(check_phi_u(g, 1, 0));
  EXPECT_FALSE(check_phi_u(f, 3, 0));  // k exceeds min(I, J)
  EXPECT_THROW(check_phi_u(f, 0, 0), InvalidArgument);
}

TEST(Uniqueness, KruskalFirst) {
  Rng rng(76);
  const auto rep = check_uniqueness(random_factors(3, 3, 4, 4, rng));
  EXPECT_TRUE(rep.kruskal_holds);
  EXPECT_EQ(rep.verdict, Verdict::UniqueByKruskal);
  EXPECT_EQ(to_string(rep.verdict), "unique-by-kruskal");
  EXPECT_EQ(rep.m, 2);
  EXPECT_TRUE(rep.compound_holds);
}

TEST(Uniqueness, FourByFiveBySixRankSeven) {
  Rng rng(77);
  const auto f = random_factors(4, 5, 6, 7, rng);
  const auto rep = check_uniqueness(f, {0, 0, 1});
  EXPECT_FALSE(rep.kruskal_holds);
  EXPECT_EQ(rep.m, 3);
  EXPECT_TRUE(rep.ab_full_rank);
  EXPECT_TRUE(rep.phi_u_full_rank.at({3, 1}));
  EXPECT_TRUE(rep.single_m_holds);
  EXPECT_TRUE(rep.uniq_via_one_fm);
  EXPECT_EQ(rep.verdict, Verdict::UniqueByPhiU);
}

TEST(Uniqueness, DeficientKhatriRaoIsInconclusive) {
  Rng rng(78);
  const auto rep = check_uniqueness(random_factors(2, 2, 5, 5, rng));
  EXPECT_FALSE(rep.ab_full_rank);
  EXPECT_EQ(rep.verdict, Verdict::Inconclusive);
}

TEST(Uniqueness, GenericKruskalNeverInconclusive) {
  Rng rng(79);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_factors(3 + trial % 2, 4, 4, 4, rng);
    if (check_kruskal(f)) EXPECT_NE(check_uniqueness(f).verdict, Verdict::Inconclusive);
  }
}

double bound(const std::vector<GenericBound>& b, const std::string& name) {
  for (const auto& x : b)
    if (x.name == name) return x.value;
  ADD_FAILURE() << "missing bound " << name;
  return 0.0;
}

TEST(GenericBounds, Examples) {
  const auto b = generic_bounds(3, 7, 12);
  EXPECT_NEAR(bound(b, "algebraic_geometry"), 12.0, 1e-12);
  EXPECT_EQ(bound(b, "full_rank_third_factor"), 12.0);
  EXPECT_EQ(bound(generic_bounds(2, 2, 2), "full_rank_third_factor"), 1.0);
  const auto c = generic_bounds(12, 5, 4);  // sorted to 4, 5, 12
  EXPECT_EQ(bound(c, "power_of_two"), 4.0);
  for (const auto& x : c)
    if (x.name == "power_of_two") EXPECT_TRUE(x.applicable);
  EXPECT_EQ(bound(c, "kruskal_generic"), 9.0);
  EXPECT_THROW(generic_bounds(1, 3, 3), InvalidArgument);
}

TEST(GenericBounds, ReachesFullRankThirdFactorRows) {
  for (const auto& [I, J] : std::vector<std::pair<int, int>>{{3, 3}, {3, 4}, {3, 5}, {3, 6}, {3, 7}, {4, 4}, {4, 5}, {5, 5}}) {
    const int R = (I - 1) * (J - 1);
    EXPECT_GE(bound(generic_bounds(I, J, R), "algebraic_geometry") + 1e-12, R) << I << "x" << J;
  }
}

}  // namespace
}  // namespace algcpd
