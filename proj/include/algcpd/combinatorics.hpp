#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace algcpd {

/// n choose k; 0 when k < 0 or k > n. Throws ResourceLimit on uint64 overflow.
std::uint64_t binomial(long n, long k);

/// All strictly increasing k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

/// All nondecreasing length-`len` tuples over {0..alphabet-1}, lexicographic.
std::vector<std::vector<int>> multisets(int alphabet, int len);

/// Lexicographic position of a nondecreasing tuple among multisets(alphabet, len).
std::uint64_t multiset_rank(std::span<const int> sorted, int alphabet);

/// Number of distinct orderings of a sorted tuple (multinomial coefficient).
std::uint64_t distinct_permutations(std::span<const int> sorted);

/// Product of factorials of the multiplicities in a sorted tuple.
std::uint64_t multiplicity_factorials(std::span<const int> sorted);

std::uint64_t factorial(int n);

/// Every permutation of {0..n-1} together with its sign (+1/-1).
struct SignedPermutation {
  std::vector<int> perm;
  int sign;
};
std::vector<SignedPermutation> signed_permutations(int n);

/// Homogeneous monomials of degree d in `vars` variables, indexed as
/// multisets(vars, d). `times_var(d, idx, k)` is the index in degree d+1 of
/// the monomial `idx` multiplied by variable k.
class MonomialTable {
public:
  MonomialTable(int vars, int max_degree);

  int vars() const noexcept { return vars_; }
  int max_degree() const noexcept { return max_degree_; }
  std::size_t count(int degree) const { return counts_.at(degree); }

  std::uint32_t times_var(int degree, std::size_t idx, int k) const {
    return mul_[degree][idx * vars_ + k];
  }

private:
  int vars_;
  int max_degree_;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<std::uint32_t>> mul_;
};

}  // namespace algcpd
