#include "algcpd/gevd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "algcpd/errors.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/random.hpp"
#include "algcpd/svd.hpp"

namespace algcpd {

namespace {

constexpr double kCompressTol = 1e-12;
constexpr double kSingularTol = 1e-12;

enum class PencilStatus { ok, singular, complex, collision };

struct Pencil {
  PencilStatus status = PencilStatus::ok;
  MatrixXd vectors;  // R x R, columns are compressed mode-2 directions
};

Pencil try_pencil(const std::vector<MatrixXd>& slices, Rng& rng, const PencilConfig& cfg) {
  const Eigen::Index P = static_cast<Eigen::Index>(slices.size());
  const Eigen::Index R = slices.front().rows();
  const VectorXd x = random_normal(P, 1, rng), y = random_normal(P, 1, rng);
  MatrixXd X = MatrixXd::Zero(R, R), Y = MatrixXd::Zero(R, R);
  for (Eigen::Index p = 0; p < P; ++p) {
    X += x(p) * slices[p];
    Y += y(p) * slices[p];
  }
  Pencil out;
  Eigen::JacobiSVD<MatrixXd> ysvd(Y);
  const auto& sy = ysvd.singularValues();
  if (!(sy(R - 1) > kSingularTol * sy(0))) {
    out.status = PencilStatus::singular;
    return out;
  }
  // X Y^{-1} = Btilde D Btilde^{-1}
  const MatrixXd E = Y.transpose().partialPivLu().solve(X.transpose()).transpose();
  Eigen::EigenSolver<MatrixXd> es(E);
  if (es.info() != Eigen::Success) {
    out.status = PencilStatus::collision;
    return out;
  }
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double radius = lambda.cwiseAbs().maxCoeff();
  if (!(radius > 0.0)) {
    out.status = PencilStatus::collision;
    return out;
  }
  if (lambda.imag().cwiseAbs().maxCoeff() > cfg.imag_tol * radius) {
    out.status = PencilStatus::complex;
    return out;
  }
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index s = r + 1; s < R; ++s)
      if (std::abs(lambda(r).real() - lambda(s).real()) < cfg.eig_sep_min * radius) {
        out.status = PencilStatus::collision;
        return out;
      }
  out.vectors = es.eigenvectors().real();
  for (Eigen::Index r = 0; r < R; ++r) out.vectors.col(r).normalize();
  return out;
}

}  // namespace

FactorTripled gevd_cpd(const Tensor3d& w, Eigen::Index R, const PencilConfig& cfg) {
  const Eigen::Index P = w.rows(), Q = w.cols(), N = w.depth();
  if (R < 1) throw InvalidArgument("gevd_cpd: rank must be positive");
  if (cfg.max_retries < 1) throw InvalidArgument("gevd_cpd: max_retries must be at least 1");
  if (P < 2 && R > 1) throw InvalidArgument("gevd_cpd: need at least two mode-1 slices");
  if (Q < R || N < R) throw RankDeficiency("gevd_cpd: mode-2 or mode-3 dimension below R");

  // Mode 3: leading right singular vectors of the PQ x N unfolding.
  const auto svd3 = robust_svd(w.unfold_r10(), Eigen::ComputeThinV);
  const auto& s3 = svd3.s;
  if (!(s3(R - 1) > kCompressTol * s3(0))) throw RankDeficiency("gevd_cpd: mode-3 rank below R");
  const MatrixXd Vc = svd3.V.leftCols(R);

  // Mode 2: leading left singular vectors of [W_1 Vc ... W_P Vc].
  const MatrixXd wv = w.unfold_r10() * Vc;  // row (p*Q + q)
  MatrixXd stacked(Q, P * R);
  for (Eigen::Index p = 0; p < P; ++p) stacked.middleCols(p * R, R) = wv.middleRows(p * Q, Q);
  const auto svd2 = robust_svd(stacked, Eigen::ComputeThinU);
  const auto& s2 = svd2.s;
  if (!(s2(R - 1) > kCompressTol * s2(0))) throw RankDeficiency("gevd_cpd: mode-2 rank below R");
  const MatrixXd Ub = svd2.U.leftCols(R);

  std::vector<MatrixXd> slices(P);
  for (Eigen::Index p = 0; p < P; ++p) slices[p] = Ub.transpose() * stacked.middleCols(p * R, R);

  Rng rng(cfg.mixing_seed);
  Pencil pencil;
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    pencil = try_pencil(slices, rng, cfg);
    if (pencil.status == PencilStatus::ok) break;
  }
  switch (pencil.status) {
    case PencilStatus::ok:
      break;
    case PencilStatus::singular:
      throw RankDeficiency("gevd_cpd: slice mixture stayed singular");
    case PencilStatus::complex:
      throw ComplexEigenvalues("gevd_cpd: complex pencil eigenvalues");
    case PencilStatus::collision:
      throw Degeneracy("gevd_cpd: pencil eigenvalues collide");
  }
  const MatrixXd& Bt = pencil.vectors;
  const Eigen::PartialPivLU<MatrixXd> lu(Bt);

  // Row r of Bt^{-1} S_p is A(p, r) ctilde_r^T.
  std::vector<MatrixXd> rows(P);
  for (Eigen::Index p = 0; p < P; ++p) rows[p] = lu.solve(slices[p]);
  MatrixXd Ct(R, R);
  for (Eigen::Index r = 0; r < R; ++r) {
    MatrixXd z(P, R);
    for (Eigen::Index p = 0; p < P; ++p) z.row(p) = rows[p].row(r);
    const auto r1 = best_rank1(z);
    Ct.col(r) = r1.v;
  }

  // A from the compressed core: core_(1) = A (Bt kr Ct)^T.
  MatrixXd core1(P, R * R);
  for (Eigen::Index p = 0; p < P; ++p)
    for (Eigen::Index q = 0; q < R; ++q) core1.row(p).segment(q * R, R) = slices[p].row(q);
  const MatrixXd kr = khatri_rao(Bt, Ct);
  const MatrixXd At = kr.colPivHouseholderQr().solve(core1.transpose());

  FactorTripled out(At.transpose(), Ub * Bt, Vc * Ct);
  const double res = relative_residual(w, out);
  if (!(res <= cfg.residual_max))
    throw VerificationFailure("gevd_cpd: reconstruction residual " + std::to_string(res) + " above threshold");
  return out;
}

PowerRoot power_root(const VectorXd& v, int K, int n, double min_fit) {
  if (n < 1 || K < 1) throw InvalidArgument("power_root: K and n must be positive");
  Eigen::Index cols = 1;
  for (int e = 1; e < n; ++e) cols *= K;
  if (v.size() != K * cols) throw InvalidArgument("power_root: length is not K^n");
  const double vn = v.norm();
  if (!(vn > 0.0)) throw NotAPower("power_root: zero vector");
  const Eigen::Map<const RowMat<double>> mat(v.data(), K, cols);
  PowerRoot out;
  if (n == 1) {
    out.f = v;
    out.fit = 1.0;
    return out;
  }
  Eigen::JacobiSVD<MatrixXd> svd(MatrixXd(mat), Eigen::ComputeThinU);
  out.fit = svd.singularValues()(0) / vn;
  out.f = svd.matrixU().col(0) * std::pow(vn, 1.0 / n);
  fix_sign(out.f);
  if (n % 2 == 1) {
    VectorXd power = out.f;
    for (int e = 1; e < n; ++e) power = kronecker(power, out.f);
    if (power.dot(v) < 0.0) out.f = -out.f;
  }
  if (!(out.fit >= min_fit))
    throw NotAPower("power_root: matricization fit " + std::to_string(out.fit) + " below threshold");
  return out;
}

}  // namespace algcpd
