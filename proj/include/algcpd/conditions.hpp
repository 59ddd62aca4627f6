#pragma once

// Checkable sufficient conditions for CPD uniqueness and the generic
// identifiability bounds. The conditions quantified over all weight vectors
// are never decided directly; only their matrix-rank surrogates are.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "algcpd/tensor.hpp"

namespace algcpd {

/// Relative singular value threshold for the rank tests below.
inline constexpr double kConditionRankTol = 1e-12;

/// 2R + 2 <= k_A + k_B + k_C with numerically computed k-ranks.
bool check_kruskal(const FactorTripled& f, double tol = 1e-9);

/// C_2(A) kr C_2(B) has full column rank (true for R = 1).
bool check_compound2(const FactorTripled& f, double tol = kConditionRankTol);

/// Full column rank of Phi_{k,l}(A,B) U, U an orthonormal basis of
/// range(S_{k+l}(C)^T). False when k exceeds min(I, J).
bool check_phi_u(const FactorTripled& f, int k, int l, double tol = kConditionRankTol);

enum class Verdict { UniqueByKruskal, UniqueByPhiU, OneFactorUnique, Inconclusive };

std::string to_string(Verdict v);

struct UniquenessReport {
  int k_A = 0, k_B = 0, k_C = 0;
  /// Rank of C, used as K, and m = R - K + 2.
  int r_C = 0;
  int m = 0;
  bool kruskal_holds = false;
  /// K = R and C_2(A) kr C_2(B) has full column rank.
  bool compound_holds = false;
  bool k_C_positive = false;
  bool ab_full_rank = false;
  /// (k, l_k) -> full column rank of Phi_{k,l_k} U_k.
  std::map<std::pair<int, int>, bool> phi_u_full_rank;
  /// min(k_A, k_B) >= m - 1.
  bool min_k_rank_ok = false;
  /// Every Phi_{k,l_k} U_k, k = 1..m, has full column rank.
  bool all_k_holds = false;
  /// min_k_rank_ok and Phi_{m,l_m} U_m has full column rank.
  bool single_m_holds = false;
  /// max(min(k_A, k_B - 1), min(k_A - 1, k_B)) + k_C >= R + 1.
  bool uniq_via_one_fm = false;
  Verdict verdict = Verdict::Inconclusive;
};

/// Assembles the certificates. l_schedule[k-1] is l_k for k = 1..m; missing
/// entries are 0. Kruskal is tried first, then the Phi U certificates.
UniquenessReport check_uniqueness(const FactorTripled& f, const std::vector<int>& l_schedule = {},
                                  double tol = kConditionRankTol);

struct GenericBound {
  std::string name;
  /// Largest R admitted by the bound (may be fractional for closed forms).
  double value = 0.0;
  bool applicable = true;
  std::string note;
};

/// Generic uniqueness bounds for I x J x K tensors; dims are sorted so that
/// I <= J <= K. Requires min dim >= 2.
std::vector<GenericBound> generic_bounds(int I, int J, int K);

}  // namespace algcpd
