#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "algcpd/combinatorics.hpp"
#include "algcpd/errors.hpp"
#include "test_support.hpp"

namespace algcpd {
namespace {

TEST(Binomial, SmallValues) {
  EXPECT_EQ(binomial(5, 2), 10u);
  EXPECT_EQ(binomial(14, 3), 364u);
  EXPECT_EQ(binomial(26, 4), 14950u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(7, 0), 1u);
  EXPECT_EQ(binomial(60, 30), 118264581564861424ull);
}

TEST(Binomial, OverflowIsReported) { EXPECT_THROW(binomial(200, 100), ResourceLimit); }

TEST(Combinations, LexicographicAndComplete) {
  const auto c = combinations(5, 3);
  ASSERT_EQ(c.size(), 10u);
  EXPECT_EQ(c.front(), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(c.back(), (std::vector<int>{2, 3, 4}));
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
}

TEST(Multisets, MatchBruteForceAndRank) {
  for (int K = 1; K <= 5; ++K)
    for (int n = 1; n <= 4; ++n) {
      const auto ms = multisets(K, n);
      const auto ref = testing::brute_sorted_tuples(K, n);
      ASSERT_EQ(ms, ref) << "K=" << K << " n=" << n;
      for (std::size_t i = 0; i < ms.size(); ++i) EXPECT_EQ(multiset_rank(ms[i], K), i);
    }
}

TEST(Multisets, DistinctPermutationCounts) {
  EXPECT_EQ(distinct_permutations(std::vector<int>{0, 0, 1}), 3u);
  EXPECT_EQ(distinct_permutations(std::vector<int>{2, 2, 2}), 1u);
  EXPECT_EQ(distinct_permutations(std::vector<int>{0, 1, 2, 3}), 24u);
  EXPECT_EQ(multiplicity_factorials(std::vector<int>{0, 0, 1, 1, 1}), 12u);
}

TEST(SignedPermutations, SignsSumToZero) {
  for (int n = 2; n <= 5; ++n) {
    const auto sp = signed_permutations(n);
    EXPECT_EQ(sp.size(), factorial(n));
    int total = 0;
    for (const auto& p : sp) total += p.sign;
    EXPECT_EQ(total, 0);
  }
}

TEST(MonomialTable, MultiplicationIndexMatchesRank) {
  const int K = 4, deg = 3;
  MonomialTable mt(K, deg);
  for (int d = 0; d < deg; ++d) {
    const auto mons = multisets(K, d);
    for (std::size_t idx = 0; idx < mons.size(); ++idx)
      for (int k = 0; k < K; ++k) {
        auto next = mons[idx];
        next.push_back(k);
        std::sort(next.begin(), next.end());
        EXPECT_EQ(mt.times_var(d, idx, k), multiset_rank(next, K));
      }
  }
  EXPECT_EQ(mt.count(3), 20u);
}

}  // namespace
}  // namespace algcpd
