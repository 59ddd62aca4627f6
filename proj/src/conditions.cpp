#include "algcpd/conditions.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>

#include "algcpd/combinatorics.hpp"
#include "algcpd/errors.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/structured_maps.hpp"
#include "algcpd/svd.hpp"

namespace algcpd {

namespace {

bool full_column_rank(const MatrixXd& m, double tol) {
  if (m.cols() == 0) return true;
  if (m.rows() < m.cols()) return false;
  return numerical_rank(m, tol) == m.cols();
}

// Orthonormal basis of the row space of x.
MatrixXd row_space(const MatrixXd& x, double tol) {
  const auto svd = robust_svd(x, Eigen::ComputeThinV);
  const auto& s = svd.s;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  return svd.V.leftCols(r);
}

// C expressed in an orthonormal basis of its column space: r_C x R.
MatrixXd compress_columns(const MatrixXd& C, double tol) {
  const auto svd = robust_svd(C, Eigen::ComputeThinU);
  const auto& s = svd.s;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  return svd.U.leftCols(r).transpose() * C;
}

double binom(int n, int k) { return k < 0 || k > n ? 0.0 : static_cast<double>(binomial(n, k)); }

}  // namespace

bool check_kruskal(const FactorTripled& f, double tol) {
  const auto R = f.rank();
  return 2 * R + 2 <= k_rank(f.A(), tol) + k_rank(f.B(), tol) + k_rank(f.C(), tol);
}

bool check_compound2(const FactorTripled& f, double tol) {
  if (f.rank() == 1) return true;
  if (std::min(f.A().rows(), f.B().rows()) < 2) return false;
  return full_column_rank(khatri_rao(compound(f.A(), 2), compound(f.B(), 2)), tol);
}

bool check_phi_u(const FactorTripled& f, int k, int l, double tol) {
  if (k < 1 || l < 0) throw InvalidArgument("check_phi_u: need k >= 1 and l >= 0");
  if (k > std::min(f.A().rows(), f.B().rows())) return false;
  const MatrixXd C = compress_columns(f.C(), 1e-9);
  const MatrixXd U = row_space(s_matrix(C, k, l), tol);
  if (U.cols() == 0) return true;
  return full_column_rank(MatrixXd(phi_compact(f.A(), f.B(), k, l) * U), tol);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::UniqueByKruskal:
      return "unique-by-kruskal";
    case Verdict::UniqueByPhiU:
      return "unique-by-phi-u";
    case Verdict::OneFactorUnique:
      return "one-factor-unique";
    case Verdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

UniquenessReport check_uniqueness(const FactorTripled& f, const std::vector<int>& l_schedule, double tol) {
  UniquenessReport rep;
  const auto R = static_cast<int>(f.rank());
  rep.k_A = k_rank(f.A());
  rep.k_B = k_rank(f.B());
  rep.k_C = k_rank(f.C());
  rep.r_C = static_cast<int>(numerical_rank(f.C()));
  rep.m = R - rep.r_C + 2;
  rep.kruskal_holds = 2 * R + 2 <= rep.k_A + rep.k_B + rep.k_C;
  rep.compound_holds = rep.r_C == R && check_compound2(f, tol);
  rep.k_C_positive = rep.k_C >= 1;
  rep.ab_full_rank = full_column_rank(khatri_rao(f.A(), f.B()), tol);
  rep.min_k_rank_ok = std::min(rep.k_A, rep.k_B) >= rep.m - 1;

  auto l_of = [&](int k) { return k - 1 < static_cast<int>(l_schedule.size()) ? l_schedule[k - 1] : 0; };
  rep.all_k_holds = true;
  for (int k = 1; k <= rep.m; ++k) {
    const bool ok = check_phi_u(f, k, l_of(k), tol);
    rep.phi_u_full_rank[{k, l_of(k)}] = ok;
    rep.all_k_holds = rep.all_k_holds && ok;
  }
  rep.single_m_holds = rep.min_k_rank_ok && rep.phi_u_full_rank.at({rep.m, l_of(rep.m)});
  rep.uniq_via_one_fm =
      std::max(std::min(rep.k_A, rep.k_B - 1), std::min(rep.k_A - 1, rep.k_B)) + rep.k_C >= R + 1;

  const bool one_factor = rep.k_C_positive && rep.ab_full_rank && (rep.all_k_holds || rep.single_m_holds);
  if (rep.kruskal_holds)
    rep.verdict = Verdict::UniqueByKruskal;
  else if (one_factor && rep.uniq_via_one_fm)
    rep.verdict = Verdict::UniqueByPhiU;
  else if (one_factor)
    rep.verdict = Verdict::OneFactorUnique;
  else
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

std::vector<GenericBound> generic_bounds(int I, int J, int K) {
  std::array<int, 3> d{I, J, K};
  std::sort(d.begin(), d.end());
  const int i = d[0], j = d[1], k = d[2];
  if (i < 2) throw InvalidArgument("generic_bounds: every dimension must be at least 2");
  std::vector<GenericBound> out;

  out.push_back({"algebraic_geometry",
                 (i + j + 2.0 * k - 2.0 - std::sqrt(static_cast<double>((i - j) * (i - j) + 4 * k))) / 2.0, true,
                 "sufficient for R >= K"});
  out.push_back({"complex_field", static_cast<double>(i) * j * k / (i + j + k - 2.0) - k, i >= 3,
                 i >= 3 ? "complex factors, R >= K" : "needs min dimension >= 3"});

  int alpha = 0, beta = 0;
  while ((2 << alpha) <= i) ++alpha;
  while ((2 << beta) <= j) ++beta;
  const double pow2 = std::ldexp(1.0, alpha + beta - 2);
  out.push_back({"power_of_two", pow2, pow2 <= i * j / 4.0,
                 "2^(alpha+beta-2) with 2^alpha <= I, 2^beta <= J; IJ/4 = " + std::to_string(i * j / 4.0)});

  out.push_back({"full_rank_third_factor", static_cast<double>((i - 1) * (j - 1)), true,
                 "R = K case; also necessary over the complex field"});

  int r2 = 0;
  for (int R = 1; R <= k; ++R)
    if (binom(R, 2) <= binom(i, 2) * binom(j, 2)) r2 = R;
  out.push_back({"compound_two", static_cast<double>(r2), true, "C(R,2) <= C(I,2) C(J,2) and R <= K"});

  out.push_back({"kruskal_generic", std::floor((i + j + k - 2) / 2.0), true, "2R + 2 <= I + J + K"});

  int rm = 0;
  for (int R = k; R - k + 2 <= i; ++R) {
    const int m = R - k + 2;
    if (binom(R, m) <= binom(i, m) * binom(j, m)) rm = R;
  }
  out.push_back({"compound_m", static_cast<double>(rm), rm > 0,
                 rm > 0 ? "C(R,m) <= C(I,m) C(J,m), m = R - K + 2" : "fails already at R = K"});
  return out;
}

}  // namespace algcpd
