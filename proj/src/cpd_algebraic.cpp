#include "algcpd/cpd_algebraic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "algcpd/combinatorics.hpp"
#include "algcpd/errors.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/random.hpp"

namespace algcpd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct PhaseOne {
  MatrixXd F;  // K x n, columns f with f^{(x)(m+l)} spanning the kernel
  Eigen::Index kernel_dim = 0;
  Eigen::Index gram_dim = 0;
};

PhaseOne phase_one(const Tensor3d& core, int m, int l, Eigen::Index expected, const CpdOptions& opts,
                   std::map<std::string, double>& diag) {
  const int K = static_cast<int>(core.depth());
  const int n = m + l;
  auto start = Clock::now();
  const GramOperator g = build_sym_gram(core, m, l, opts.gram);
  diag["gram_seconds"] = seconds_since(start);
  start = Clock::now();
  const KernelBasis kb = sym_kernel(g, expected, opts.kernel);
  diag["kernel_seconds"] = seconds_since(start);
  diag["kernel_gap"] = kb.gap;

  PhaseOne out;
  out.kernel_dim = kb.n;
  out.gram_dim = g.dim();
  start = Clock::now();
  const Tensor3d w = expand_and_fold(kb, K, m, l);
  const FactorTripled aux = gevd_cpd(w, expected, opts.pencil);
  diag["gevd_seconds"] = seconds_since(start);
  out.F = aux.A();
  // Mode-2 columns must be (n-1)-th powers of the mode-1 columns.
  double min_fit = 1.0;
  if (n - 1 >= 2) {
    for (Eigen::Index r = 0; r < aux.rank(); ++r)
      min_fit = std::min(min_fit, power_root(aux.B().col(r), K, n - 1, opts.power_fit_min).fit);
  }
  diag["min_power_fit"] = min_fit;
  return out;
}

CpdResult finish(const Tensor3d& t, const Mode3Compression<double>& comp, const MatrixXd& C, const MatrixXd& F,
                 const CpdOptions& opts, CpdResult res) {
  const FactorTripled core = recover_AB(comp.tensor, C, F, opts.rank1_fit_min);
  res.factors = FactorTripled(core.A(), core.B(), comp.basis * core.C());
  res.residual = relative_residual(t, res.factors);
  if (!(res.residual <= opts.residual_max))
    throw VerificationFailure("relative residual " + std::to_string(res.residual) + " above threshold");
  return res;
}

void check_rank(Eigen::Index R) {
  if (R < 1) throw InvalidArgument("rank must be positive");
}

CpdResult run_algorithm1(const Tensor3d& t, const Mode3Compression<double>& comp, Eigen::Index R, int l,
                         const CpdOptions& opts) {
  const auto start = Clock::now();
  CpdResult res;
  res.m = 2;
  res.l_used = l;
  if (R == 1) {
    res.kernel_dim = 1;
    MatrixXd one = MatrixXd::Ones(1, 1);
    res.diagnostics["total_seconds"] = seconds_since(start);
    return finish(t, comp, one, one, opts, std::move(res));
  }
  if (std::min(t.rows(), t.cols()) < 2)
    throw ConditionViolation("min(I, J) < 2: the decomposition is not algebraically determined");
  const PhaseOne p1 = phase_one(comp.tensor, 2, l, R, opts, res.diagnostics);
  res.kernel_dim = p1.kernel_dim;
  res.gram_dim = p1.gram_dim;
  const MatrixXd C = recover_C_from_F(p1.F, R, opts.ortho_tol, opts.seed, opts.ransac_cap);
  res = finish(t, comp, C, p1.F, opts, std::move(res));
  res.diagnostics["total_seconds"] = seconds_since(start);
  return res;
}

CpdResult run_algorithm2(const Tensor3d& t, const Mode3Compression<double>& comp, Eigen::Index R, int l,
                         const CpdOptions& opts) {
  const auto start = Clock::now();
  const Eigen::Index K = comp.tensor.depth();
  const Eigen::Index m = R - K + 2;
  if (K < 2) throw ConditionViolation("mode-3 rank 1 with R > 1: no algebraic decomposition");
  if (m > std::min(t.rows(), t.cols()))
    throw ConditionViolation("m = R - K + 2 = " + std::to_string(m) + " exceeds min(I, J)");
  CpdResult res;
  res.m = static_cast<int>(m);
  res.l_used = l;
  const auto expected = static_cast<Eigen::Index>(binomial(R, K - 1));
  const PhaseOne p1 = phase_one(comp.tensor, static_cast<int>(m), l, expected, opts, res.diagnostics);
  res.kernel_dim = p1.kernel_dim;
  res.gram_dim = p1.gram_dim;
  const auto rstart = Clock::now();
  const MatrixXd C = recover_C_from_F(p1.F, R, opts.ortho_tol, opts.seed, opts.ransac_cap);
  res.diagnostics["hyperplane_seconds"] = seconds_since(rstart);
  res = finish(t, comp, C, p1.F, opts, std::move(res));
  res.diagnostics["total_seconds"] = seconds_since(start);
  return res;
}

Mode3Compression<double> compress_checked(const Tensor3d& t, Eigen::Index R) {
  check_rank(R);
  auto comp = mode3_compress(t);
  if (comp.tensor.depth() > R)
    throw ConditionViolation("mode-3 rank " + std::to_string(comp.tensor.depth()) + " exceeds R = " +
                             std::to_string(R));
  return comp;
}

}  // namespace

CpdResult algorithm1(const Tensor3d& t, Eigen::Index R, int l, const CpdOptions& opts) {
  const auto comp = compress_checked(t, R);
  if (comp.tensor.depth() != R)
    throw ConditionViolation("mode-3 rank " + std::to_string(comp.tensor.depth()) + " is below R = " +
                             std::to_string(R));
  return run_algorithm1(t, comp, R, l, opts);
}

CpdResult algorithm2(const Tensor3d& t, Eigen::Index R, int l, const CpdOptions& opts) {
  const auto comp = compress_checked(t, R);
  if (comp.tensor.depth() == R) return run_algorithm1(t, comp, R, l, opts);
  return run_algorithm2(t, comp, R, l, opts);
}

CpdResult decompose(const Tensor3d& t, Eigen::Index R, int l, const CpdOptions& opts) {
  return algorithm2(t, R, l, opts);
}

CpdResult auto_l(const Tensor3d& t, Eigen::Index R, const CpdOptions& opts) {
  if (opts.l_max < 0) throw InvalidArgument("auto_l: l_max must be nonnegative");
  std::vector<LAttempt> attempts;
  bool all_conditions = true;
  for (int l = 0; l <= opts.l_max; ++l) {
    try {
      CpdResult res = decompose(t, R, l, opts);
      res.attempts = std::move(attempts);
      return res;
    } catch (const ConditionViolation& e) {
      attempts.push_back({l, e.found_dim(), e.what()});
    } catch (const ResourceLimit&) {
      throw;
    } catch (const InvalidArgument&) {
      throw;
    } catch (const Error& e) {
      all_conditions = false;
      attempts.push_back({l, -1, e.what()});
    }
  }
  std::ostringstream msg;
  msg << "no l in [0, " << opts.l_max << "] succeeded";
  for (const auto& a : attempts) {
    msg << "; l=" << a.l << ": ";
    if (a.kernel_dim >= 0) msg << "kernel dim " << a.kernel_dim << ", ";
    msg << a.reason;
  }
  if (all_conditions) throw ConditionViolation(msg.str(), attempts.empty() ? -1 : attempts.back().kernel_dim);
  throw VerificationFailure(msg.str());
}

std::uint64_t hyperplane_members(Eigen::Index R, Eigen::Index K) {
  if (K < 2) return 0;
  return binomial(R - 1, K - 2);
}

std::uint64_t ransac_budget(Eigen::Index R, Eigen::Index K, std::uint64_t cap) {
  const double p = std::min(1.0, static_cast<double>(R) * std::pow(static_cast<double>(K - 1) / R, K - 1));
  const double budget = 200.0 * std::ceil(1.0 / p);
  return static_cast<std::uint64_t>(std::min(budget, static_cast<double>(cap)));
}

MatrixXd recover_C_from_F(const MatrixXd& F, Eigen::Index R, double tol, std::uint64_t seed, std::uint64_t cap) {
  const Eigen::Index K = F.rows(), N = F.cols();
  if (R < 1 || K < 1) throw InvalidArgument("recover_C_from_F: empty problem");
  if (K > R) throw InvalidArgument("recover_C_from_F: K exceeds R");
  if (K == 1) {
    if (R != 1) throw InvalidArgument("recover_C_from_F: K = 1 requires R = 1");
    return MatrixXd::Ones(1, 1);
  }
  if (static_cast<std::uint64_t>(N) != binomial(R, K - 1))
    throw InvalidArgument("recover_C_from_F: F must have C(R, K-1) columns");
  if (K == R) {
    Eigen::JacobiSVD<MatrixXd> svd(F);
    const auto& s = svd.singularValues();
    if (!(s(K - 1) > kRankTol * s(0))) throw RecoveryFailure("recover_C_from_F: F is singular");
    return F.transpose().fullPivLu().solve(MatrixXd::Identity(K, K));
  }

  MatrixXd Fn = F;
  for (Eigen::Index c = 0; c < N; ++c) {
    const double nc = Fn.col(c).norm();
    if (!(nc > 0.0)) throw RecoveryFailure("recover_C_from_F: F has a zero column");
    Fn.col(c) /= nc;
  }
  const std::uint64_t members = hyperplane_members(R, K);
  const std::uint64_t budget = ransac_budget(R, K, cap);
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, N - 1);
  std::set<std::vector<Eigen::Index>> seen;
  std::vector<VectorXd> normals;
  MatrixXd sub(K, K - 1);
  std::vector<Eigen::Index> idx;
  for (std::uint64_t it = 0; it < budget && static_cast<Eigen::Index>(normals.size()) < R; ++it) {
    idx.clear();
    while (static_cast<Eigen::Index>(idx.size()) < K - 1) {
      const Eigen::Index c = pick(rng);
      if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
    }
    for (Eigen::Index p = 0; p < K - 1; ++p) sub.col(p) = Fn.col(idx[p]);
    Eigen::JacobiSVD<MatrixXd> svd(sub, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    if (!(s(K - 2) > 1e-6 * s(0))) continue;
    const VectorXd normal = svd.matrixU().col(K - 1);
    const VectorXd cosines = (Fn.transpose() * normal).cwiseAbs();
    std::vector<Eigen::Index> orth;
    for (Eigen::Index c = 0; c < N; ++c)
      if (cosines(c) <= tol) orth.push_back(c);
    if (orth.size() != members || !seen.insert(orth).second) continue;
    MatrixXd span(K, static_cast<Eigen::Index>(orth.size()));
    for (Eigen::Index p = 0; p < span.cols(); ++p) span.col(p) = Fn.col(orth[p]);
    Eigen::JacobiSVD<MatrixXd> refine(span, Eigen::ComputeFullU);
    normals.push_back(refine.matrixU().col(K - 1));
  }
  if (static_cast<Eigen::Index>(normals.size()) < R)
    throw RecoveryFailure("recover_C_from_F: found " + std::to_string(normals.size()) + " of " + std::to_string(R) +
                          " hyperplanes in " + std::to_string(budget) + " samples");
  MatrixXd C(K, R);
  for (Eigen::Index r = 0; r < R; ++r) C.col(r) = normals[r];
  return C;
}

namespace {

// Unit vector closest to lying in every subspace spanned by a block of
// orthonormal columns; fit = sigma_1^2 / blocks, equal to 1 for an exact
// common direction.
Rank1<double> common_direction(const MatrixXd& bases, Eigen::Index blocks) {
  Eigen::JacobiSVD<MatrixXd> svd(bases, Eigen::ComputeThinU);
  Rank1<double> out;
  out.u = svd.matrixU().col(0);
  out.sigma = svd.singularValues()(0);
  out.fit = out.sigma * out.sigma / static_cast<double>(blocks);
  return out;
}

// K < R: the slice t x_3 f_S equals A_S' diag(.) B_S'^T over the complement S'
// of S, so a_r (b_r) is the one direction shared by the column (row) spaces of
// all slices with r in S'. Those slices are the C(R-1, K-1) columns of F least
// orthogonal to c_r.
void intersect_spaces(const Tensor3d& t, const MatrixXd& C, const MatrixXd& F, double fit_min, MatrixXd& A,
                      MatrixXd& B) {
  const Eigen::Index I = t.rows(), J = t.cols(), K = t.depth(), R = C.cols(), N = F.cols();
  const Eigen::Index span = R - K + 1;
  if (span > std::min(I, J)) throw RankDeficiency("recover_AB: slice rank R - K + 1 exceeds min(I, J)");
  const auto per_term = static_cast<Eigen::Index>(binomial(R - 1, K - 1));
  std::vector<MatrixXd> col_spaces, row_spaces;
  for (Eigen::Index s = 0; s < N; ++s) {
    Eigen::JacobiSVD<MatrixXd> svd(contract_mode3(t, F.col(s)), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(span - 1) > kRankTol * sv(0)))
      throw RankDeficiency("recover_AB: slice " + std::to_string(s) + " has rank below R - K + 1");
    col_spaces.push_back(svd.matrixU().leftCols(span));
    row_spaces.push_back(svd.matrixV().leftCols(span));
  }
  MatrixXd cosines = C.transpose() * F;
  for (Eigen::Index r = 0; r < R; ++r) cosines.row(r) /= C.col(r).norm();
  for (Eigen::Index s = 0; s < N; ++s) cosines.col(s) /= F.col(s).norm();
  cosines = cosines.cwiseAbs();

  A.resize(I, R);
  B.resize(J, R);
  std::vector<Eigen::Index> order(N);
  for (Eigen::Index r = 0; r < R; ++r) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + per_term, order.end(),
                      [&](Eigen::Index x, Eigen::Index y) { return cosines(r, x) > cosines(r, y); });
    MatrixXd us(I, per_term * span), vs(J, per_term * span);
    for (Eigen::Index p = 0; p < per_term; ++p) {
      us.middleCols(p * span, span) = col_spaces[order[p]];
      vs.middleCols(p * span, span) = row_spaces[order[p]];
    }
    const auto a = common_direction(us, per_term);
    const auto b = common_direction(vs, per_term);
    const double fit = std::min(a.fit, b.fit);
    if (!(fit >= fit_min))
      throw VerificationFailure("recover_AB: term " + std::to_string(r) + " has subspace intersection fit " +
                                std::to_string(fit));
    A.col(r) = a.u;
    B.col(r) = b.u;
  }
}

}  // namespace

FactorTripled recover_AB(const Tensor3d& t, const MatrixXd& C, const MatrixXd& F, double rank1_fit_min) {
  const Eigen::Index I = t.rows(), J = t.cols(), K = t.depth(), R = C.cols();
  if (C.rows() != K || F.rows() != K) throw InvalidArgument("recover_AB: C and F must have K rows");
  if (R < K) throw InvalidArgument("recover_AB: C must have at least K columns");
  MatrixXd A(I, R), B(J, R);
  if (R > K) {
    intersect_spaces(t, C, F, rank1_fit_min, A, B);
  } else {
    const MatrixXd lambda = C.transpose() * F;  // R x R
    Eigen::JacobiSVD<MatrixXd> svd(lambda);
    const auto& s = svd.singularValues();
    if (s.size() < R || !(s(R - 1) > kRankTol * s(0))) throw RankDeficiency("recover_AB: C^T F has rank below R");
    const MatrixXd Y = t.unfold_r10() * F;  // (A kr B) lambda
    const MatrixXd kr = lambda.transpose().colPivHouseholderQr().solve(Y.transpose()).transpose();
    for (Eigen::Index r = 0; r < R; ++r) {
      const Eigen::Map<const RowMat<double>> col(kr.col(r).data(), I, J);
      const auto r1 = best_rank1(MatrixXd(col));
      if (!(r1.fit >= rank1_fit_min))
        throw VerificationFailure("recover_AB: column " + std::to_string(r) + " of A kr B has rank-one fit " +
                                  std::to_string(r1.fit));
      A.col(r) = r1.u.normalized();
      B.col(r) = r1.v.normalized();
    }
  }
  for (Eigen::Index r = 0; r < R; ++r) {
    auto a = A.col(r);
    fix_sign(a);
    auto b = B.col(r);
    fix_sign(b);
  }
  const MatrixXd ab = khatri_rao(A, B);
  const MatrixXd Ct = ab.colPivHouseholderQr().solve(MatrixXd(t.unfold_r10()));
  return FactorTripled(std::move(A), std::move(B), Ct.transpose());
}

AlsResult als_baseline(const Tensor3d& t, Eigen::Index R, int n_inits, int n_iters, std::uint64_t seed) {
  check_rank(R);
  if (n_inits < 1 || n_iters < 1) throw InvalidArgument("als_baseline: need at least one init and iteration");
  const Eigen::Index I = t.rows(), J = t.cols(), K = t.depth();
  const MatrixXd T1 = t.unfold_mode1();            // I x JK, column j*K + k
  const MatrixXd T3 = t.unfold_r10().transpose();  // K x IJ, column i*J + j
  MatrixXd T2(J, I * K);                           // column i*K + k
  for (Eigen::Index i = 0; i < I; ++i)
    for (Eigen::Index j = 0; j < J; ++j)
      for (Eigen::Index k = 0; k < K; ++k) T2(j, i * K + k) = t(i, j, k);
  const double tnorm2 = t.data().squaredNorm();

  auto solve = [](const MatrixXd& mttkrp, const MatrixXd& gram) {
    return MatrixXd(gram.ldlt().solve(mttkrp.transpose()).transpose());
  };

  AlsResult best{FactorTripled{}, std::numeric_limits<double>::infinity(), 0};
  for (int init = 0; init < n_inits; ++init) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(init)));
    MatrixXd A = random_normal(I, R, rng), B = random_normal(J, R, rng), C = random_normal(K, R, rng);
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < n_iters; ++it) {
      A = solve(T1 * khatri_rao(B, C), (B.transpose() * B).cwiseProduct(C.transpose() * C));
      B = solve(T2 * khatri_rao(A, C), (A.transpose() * A).cwiseProduct(C.transpose() * C));
      const MatrixXd M3 = T3 * khatri_rao(A, B);
      const MatrixXd gab = (A.transpose() * A).cwiseProduct(B.transpose() * B);
      C = solve(M3, gab);
      const double next = std::sqrt((T3 - C * khatri_rao(A, B).transpose()).squaredNorm() / tnorm2);
      const bool stalled = std::isfinite(residual) && std::abs(residual - next) <= 1e-12 * residual;
      residual = next;
      if (residual <= 1e-13 || stalled) {
        ++it;
        break;
      }
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite()) continue;
    try {
      FactorTripled f(A, B, C);
      const double exact = relative_residual(t, f);
      if (exact < best.residual) best = {std::move(f), exact, it};
    } catch (const InvalidArgument&) {
      // A run that collapsed a column to zero is skipped.
    }
  }
  if (!std::isfinite(best.residual)) throw VerificationFailure("als_baseline: every run diverged");
  return best;
}

}  // namespace algcpd
