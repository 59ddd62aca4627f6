#include "algcpd/null_intersection.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "algcpd/errors.hpp"
#include "algcpd/random.hpp"
#include "algcpd/svd.hpp"

namespace algcpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Spectrum {
  VectorXd sigma;    // ascending
  MatrixXd vectors;  // right singular vectors, same order
  double sigma_max = 0.0;
};

// All right singular vectors of g (rows x D); missing singular values are zero.
Spectrum dense_spectrum(const MatrixXd& g) {
  const Eigen::Index D = g.cols();
  Spectrum out;
  out.sigma = VectorXd::Zero(D);
  if (g.rows() == 0 || g.norm() == 0.0) {
    out.vectors = MatrixXd::Identity(D, D);
    return out;
  }
  const auto svd = robust_svd(g, Eigen::ComputeFullV);
  const VectorXd& s = svd.s;
  const Eigen::Index k = s.size();
  out.sigma.tail(k) = s.reverse();
  out.vectors.resize(D, D);
  out.vectors.rightCols(k) = svd.V.leftCols(k).rowwise().reverse();
  out.vectors.leftCols(D - k) = svd.V.rightCols(D - k);
  out.sigma_max = s(0);
  return out;
}

MatrixXd orthonormalize(const MatrixXd& v) {
  Eigen::HouseholderQR<MatrixXd> qr(v);
  return qr.householderQ() * MatrixXd::Identity(v.rows(), v.cols());
}

double power_sigma_max(const MatrixXd& r) {
  Rng rng(0x51a7e);
  VectorXd x = random_normal(r.cols(), 1, rng);
  double sigma = 0.0;
  for (int it = 0; it < 100; ++it) {
    x.normalize();
    const VectorXd y = r.triangularView<Eigen::Upper>() * x;
    const double next = y.norm();
    x = r.triangularView<Eigen::Upper>().transpose() * y;
    if (it > 5 && std::abs(next - sigma) <= 1e-8 * next) return next;
    sigma = next;
  }
  return sigma;
}

// Lowest singular triplets of the upper triangular r by subspace inverse
// iteration; pivots below eps * sigma_max are lifted to keep the solves finite.
Spectrum iterative_spectrum(const MatrixXd& r, Eigen::Index expected_n, double tol_kernel) {
  const Eigen::Index D = r.cols();
  Spectrum out;
  out.sigma_max = power_sigma_max(r);
  if (!(out.sigma_max > 0.0)) {
    out.sigma = VectorXd::Zero(D);
    out.vectors = MatrixXd::Identity(D, D);
    return out;
  }
  MatrixXd lifted = r;
  const double floor = std::numeric_limits<double>::epsilon() * out.sigma_max;
  for (Eigen::Index i = 0; i < D; ++i)
    if (std::abs(lifted(i, i)) < floor) lifted(i, i) = floor;

  Rng rng(0xb10c);
  Eigen::Index block = std::min(D, expected_n + 5);
  while (true) {
    MatrixXd v = orthonormalize(random_normal(D, block, rng));
    VectorXd previous = VectorXd::Constant(block, kInf);
    for (int it = 0; it < 50; ++it) {
      MatrixXd y = lifted.transpose().triangularView<Eigen::Lower>().solve(v);
      y = lifted.triangularView<Eigen::Upper>().solve(y);
      v = orthonormalize(y);
      const MatrixXd rv = r.triangularView<Eigen::Upper>() * v;
      Eigen::JacobiSVD<MatrixXd> svd(rv, Eigen::ComputeThinV);
      out.sigma = svd.singularValues().reverse();
      v = v * svd.matrixV().rowwise().reverse();
      const double change = ((out.sigma - previous).cwiseAbs().array() /
                             out.sigma.cwiseMax(tol_kernel * out.sigma_max).array())
                                .maxCoeff();
      previous = out.sigma;
      if (it >= 2 && change < 1e-6) break;
    }
    out.vectors = v;
    Eigen::Index zeros = 0;
    while (zeros < block && out.sigma(zeros) <= tol_kernel * out.sigma_max) ++zeros;
    if (zeros < block || block == D) return out;
    block = std::min(D, 2 * block);
  }
}

KernelBasis accept(const Spectrum& sp, Eigen::Index D, Eigen::Index expected_n, const KernelOptions& opts) {
  KernelBasis out;
  out.expected_n = expected_n;
  if (!(sp.sigma_max > 0.0)) {
    out.n = D;
    out.gap = kInf;
    out.w = MatrixXd::Identity(D, D);
  } else {
    const SpectrumSplit split = split_spectrum(sp.sigma, sp.sigma_max, opts.tol_kernel);
    out.n = split.zeros;
    out.gap = split.gap;
    out.w = sp.vectors.leftCols(out.n);
    const Eigen::Index head = std::min<Eigen::Index>(sp.sigma.size(), std::max(out.n, expected_n) + 3);
    for (Eigen::Index i = 0; i < head; ++i) out.spectrum_head.push_back(sp.sigma(i) / sp.sigma_max);
  }
  if (out.n != expected_n)
    throw ConditionViolation("kernel dimension " + std::to_string(out.n) + " differs from expected " +
                                 std::to_string(expected_n),
                             static_cast<long>(out.n), out.spectrum_head);
  if (!(out.gap > opts.gap_min))
    throw ConditionViolation("kernel spectral gap " + std::to_string(out.gap) + " below threshold",
                             static_cast<long>(out.n), out.spectrum_head);
  return out;
}

void check_expected(Eigen::Index expected_n, Eigen::Index D) {
  if (expected_n < 0 || expected_n > D) throw InvalidArgument("sym_kernel: expected dimension out of range");
}

}  // namespace

SpectrumSplit split_spectrum(const VectorXd& ascending, double scale, double tol) {
  SpectrumSplit out;
  const Eigen::Index n = ascending.size();
  while (out.zeros < n && ascending(out.zeros) <= tol * scale) ++out.zeros;
  const double tiny = std::numeric_limits<double>::min();
  if (out.zeros == n) {
    out.gap = kInf;
  } else if (out.zeros == 0) {
    out.gap = ascending(0) / std::max(tol * scale, tiny);
  } else {
    out.gap = ascending(out.zeros) / std::max(std::abs(ascending(out.zeros - 1)), tiny);
  }
  return out;
}

KernelBasis sym_kernel(const GramOperator& q, Eigen::Index expected_n, const KernelOptions& opts) {
  const Eigen::Index D = q.dim();
  if (q.r.rows() != D) throw InvalidArgument("sym_kernel: Gram factor must be square");
  check_expected(expected_n, D);
  const Spectrum sp = D <= opts.dense_max ? dense_spectrum(q.r) : iterative_spectrum(q.r, expected_n, opts.tol_kernel);
  return accept(sp, D, expected_n, opts);
}

KernelBasis kernel_of_rows(const MatrixXd& g, Eigen::Index expected_n, const KernelOptions& opts) {
  check_expected(expected_n, g.cols());
  return accept(dense_spectrum(g), g.cols(), expected_n, opts);
}

Tensor3d expand_and_fold(const KernelBasis& w, int K, int m, int l) {
  const int n = m + l;
  const SymmetricBasis basis(K, n);
  if (w.w.rows() != basis.dim()) throw InvalidArgument("expand_and_fold: basis size does not match K, m, l");
  const Eigen::Index N = w.w.cols();
  const Eigen::Index Kn1 = basis.full_dim() / K;
  Tensor3d out(K, Kn1, N);
  Eigen::Map<RowMat<double>> flat(out.data().data(), basis.full_dim(), N);
  for (Eigen::Index s = 0; s < N; ++s) flat.col(s) = basis.expand(w.w.col(s));
  return out;
}

}  // namespace algcpd
