#include "algcpd/combinatorics.hpp"

#include <algorithm>
#include <numeric>

#include "algcpd/errors.hpp"

namespace algcpd {

std::uint64_t binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (long i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (acc > static_cast<unsigned __int128>(UINT64_MAX))
      throw ResourceLimit("binomial coefficient overflows 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t factorial(int n) {
  if (n < 0) throw InvalidArgument("factorial of negative number");
  if (n > 20) throw ResourceLimit("factorial overflows 64 bits");
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

std::vector<std::vector<int>> multisets(int alphabet, int len) {
  std::vector<std::vector<int>> out;
  if (len < 0 || alphabet <= 0) return out;
  std::vector<int> c(len, 0);
  while (true) {
    out.push_back(c);
    int i = len - 1;
    while (i >= 0 && c[i] == alphabet - 1) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < len; ++j) c[j] = c[i];
  }
  return out;
}

std::uint64_t multiset_rank(std::span<const int> sorted, int alphabet) {
  // Count tuples that branch off to a smaller value at position p.
  std::uint64_t rank = 0;
  const long len = static_cast<long>(sorted.size());
  int prev = 0;
  for (long p = 0; p < len; ++p) {
    const long rest = len - p - 1;
    for (int v = prev; v < sorted[p]; ++v)
      rank += binomial((alphabet - v) + rest - 1, rest);
    prev = sorted[p];
  }
  return rank;
}

std::uint64_t multiplicity_factorials(std::span<const int> sorted) {
  std::uint64_t acc = 1;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      acc *= factorial(static_cast<int>(run));
      run = 1;
    }
  }
  return acc;
}

std::uint64_t distinct_permutations(std::span<const int> sorted) {
  return factorial(static_cast<int>(sorted.size())) / multiplicity_factorials(sorted);
}

std::vector<SignedPermutation> signed_permutations(int n) {
  std::vector<SignedPermutation> out;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (p[i] > p[j]) ++inversions;
    out.push_back({p, (inversions % 2 == 0) ? 1 : -1});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

MonomialTable::MonomialTable(int vars, int max_degree)
    : vars_(vars), max_degree_(max_degree) {
  if (vars < 1 || max_degree < 0) throw InvalidArgument("MonomialTable: bad shape");
  for (int d = 0; d <= max_degree; ++d) {
    const auto n = binomial(vars + d - 1, d);
    if (n > UINT32_MAX) throw ResourceLimit("MonomialTable: too many monomials");
    counts_.push_back(static_cast<std::size_t>(n));
  }
  mul_.resize(max_degree);
  std::vector<int> next;
  for (int d = 0; d < max_degree; ++d) {
    const auto mons = multisets(vars, d);
    auto& table = mul_[d];
    table.resize(mons.size() * vars);
    for (std::size_t idx = 0; idx < mons.size(); ++idx) {
      for (int k = 0; k < vars; ++k) {
        next = mons[idx];
        next.insert(std::upper_bound(next.begin(), next.end(), k), k);
        table[idx * vars + k] = static_cast<std::uint32_t>(multiset_rank(next, vars));
      }
    }
  }
}

}  // namespace algcpd
