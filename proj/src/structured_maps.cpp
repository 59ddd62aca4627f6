#include "algcpd/structured_maps.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "algcpd/combinatorics.hpp"
#include "algcpd/errors.hpp"
#include "algcpd/multilinear.hpp"

namespace algcpd {

namespace {

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int e = 0; e < exp; ++e) {
    if (base != 0 && out > UINT64_MAX / base) throw ResourceLimit("index space overflows 64 bits");
    out *= base;
  }
  return out;
}

void decode(std::uint64_t flat, int base, std::vector<int>& digits) {
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    *it = static_cast<int>(flat % base);
    flat /= base;
  }
}

bool first_distinct(const std::vector<int>& digits, int m) {
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q)
      if (digits[p] == digits[q]) return false;
  return true;
}

/// Every distinct ordering of a sorted tuple.
std::vector<std::vector<int>> orderings(std::vector<int> sorted) {
  std::vector<std::vector<int>> out;
  do {
    out.push_back(sorted);
  } while (std::next_permutation(sorted.begin(), sorted.end()));
  return out;
}

void check_orders(int m, int l) {
  if (m < 1) throw InvalidArgument("order m must be at least 1");
  if (l < 0) throw InvalidArgument("order l must be nonnegative");
}

void guard_entries(std::uint64_t rows, std::uint64_t cols, std::size_t max_entries, const char* what) {
  if (cols != 0 && rows > max_entries / cols)
    throw ResourceLimit(std::string(what) + ": dense size " + std::to_string(rows) + " x " +
                        std::to_string(cols) + " exceeds the assembly guard");
}

std::uint64_t combination_rank(const std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  std::uint64_t rank = 0;
  int prev = -1;
  for (int p = 0; p < k; ++p) {
    for (int v = prev + 1; v < c[p]; ++v) rank += binomial(n - v - 1, k - p - 1);
    prev = c[p];
  }
  return rank;
}

}  // namespace

std::uint64_t tuple_count(int m, int l, int R) {
  check_orders(m, l);
  std::uint64_t total = 0;
  for (int k = 0; k <= l; ++k) total += binomial(R, m + k) * binomial(m + l - 1, m + k - 1);
  return total;
}

std::vector<SymTupleIndex> enumerate_tuples(int m, int l, int R) {
  check_orders(m, l);
  if (R < m) throw InvalidArgument("enumerate_tuples: R must be at least m");
  std::vector<SymTupleIndex> out;
  for (auto& t : multisets(R, m + l)) {
    int distinct = 1;
    for (std::size_t p = 1; p < t.size(); ++p)
      if (t[p] != t[p - 1]) ++distinct;
    if (distinct >= m) out.push_back({std::move(t), distinct});
  }
  return out;
}

std::uint64_t sym_dim(int K, int n) { return binomial(K + n - 1, n); }

// ---------------------------------------------------------------------------
// SymmetricBasis

SymmetricBasis::SymmetricBasis(int K, int degree) : K_(K), degree_(degree) {
  if (K < 1 || degree < 1) throw InvalidArgument("SymmetricBasis: K and degree must be positive");
  const std::uint64_t full = checked_pow(K, degree);
  if (full > UINT32_MAX) throw ResourceLimit("SymmetricBasis: K^n too large");
  for (auto& mu : multisets(K, degree)) {
    SymMultiset e;
    e.multiplicity.assign(K, 0);
    for (int v : mu) ++e.multiplicity[v];
    e.weight = std::sqrt(static_cast<double>(distinct_permutations(mu)));
    e.multiset = std::move(mu);
    elements_.push_back(std::move(e));
  }
  full_to_compressed_.resize(full);
  std::vector<int> digits(degree);
  for (std::uint64_t f = 0; f < full; ++f) {
    decode(f, K, digits);
    std::sort(digits.begin(), digits.end());
    full_to_compressed_[f] = static_cast<std::uint32_t>(multiset_rank(digits, K));
  }
}

VectorXd SymmetricBasis::expand(const VectorXd& w) const {
  if (w.size() != dim()) throw InvalidArgument("SymmetricBasis::expand: length mismatch");
  VectorXd x(full_dim());
  for (Eigen::Index f = 0; f < full_dim(); ++f) {
    const auto c = full_to_compressed_[f];
    x(f) = w(c) / elements_[c].weight;
  }
  return x;
}

VectorXd SymmetricBasis::compress(const VectorXd& x) const {
  if (x.size() != full_dim()) throw InvalidArgument("SymmetricBasis::compress: length mismatch");
  VectorXd w = VectorXd::Zero(dim());
  for (Eigen::Index f = 0; f < full_dim(); ++f) w(full_to_compressed_[f]) += x(f);
  for (Eigen::Index c = 0; c < dim(); ++c) w(c) /= elements_[c].weight;
  return w;
}

MatrixXd SymmetricBasis::matrix() const {
  MatrixXd P = MatrixXd::Zero(full_dim(), dim());
  for (Eigen::Index f = 0; f < full_dim(); ++f) {
    const auto c = full_to_compressed_[f];
    P(f, c) = 1.0 / elements_[c].weight;
  }
  return P;
}

// ---------------------------------------------------------------------------
// Dense reference constructions

MatrixXd build_rml(const Tensor3d& t, int m, int l, std::size_t max_entries) {
  check_orders(m, l);
  const int I = static_cast<int>(t.rows()), J = static_cast<int>(t.cols()), K = static_cast<int>(t.depth());
  if (m > std::min(I, J)) throw InvalidArgument("build_rml: m exceeds min(I, J)");
  const int n = m + l;
  const std::uint64_t In = checked_pow(I, n), Jn = checked_pow(J, n), Kn = checked_pow(K, n);
  guard_entries(In * Jn, Kn, max_entries, "build_rml");

  const SymmetricBasis basis(K, n);
  std::vector<std::vector<std::vector<int>>> perms(basis.dim());
  std::vector<double> prefactor(basis.dim());
  std::vector<std::vector<Eigen::Index>> scatter(basis.dim());
  const double norm = 1.0 / static_cast<double>(factorial(m) * factorial(n));
  for (Eigen::Index c = 0; c < basis.dim(); ++c) {
    const auto& mu = basis.element(c).multiset;
    perms[c] = orderings(mu);
    prefactor[c] = norm * static_cast<double>(multiplicity_factorials(mu));
  }
  for (Eigen::Index f = 0; f < basis.full_dim(); ++f) scatter[basis.compressed_index(f)].push_back(f);
  const auto sp = signed_permutations(m);

  MatrixXd out = MatrixXd::Zero(static_cast<Eigen::Index>(In * Jn), static_cast<Eigen::Index>(Kn));
  std::vector<int> is(n), js(n);
  for (std::uint64_t it = 0; it < In; ++it) {
    decode(it, I, is);
    if (!first_distinct(is, m)) continue;
    for (std::uint64_t jt = 0; jt < Jn; ++jt) {
      decode(jt, J, js);
      if (!first_distinct(js, m)) continue;
      const auto row = static_cast<Eigen::Index>(it * Jn + jt);
      for (Eigen::Index c = 0; c < basis.dim(); ++c) {
        double acc = 0.0;
        for (const auto& s : perms[c]) {
          double det = 0.0;
          for (const auto& p : sp) {
            double prod = p.sign;
            for (int q = 0; q < m; ++q) prod *= t(is[p.perm[q]], js[q], s[q]);
            det += prod;
          }
          for (int e = m; e < n; ++e) det *= t(is[e], js[e], s[e]);
          acc += det;
        }
        acc *= prefactor[c];
        for (auto f : scatter[c]) out(row, f) = acc;
      }
    }
  }
  return out;
}

MatrixXd phi(const MatrixXd& A, const MatrixXd& B, int m, int l, std::size_t max_entries) {
  check_orders(m, l);
  if (A.cols() != B.cols()) throw InvalidArgument("phi: A and B column counts differ");
  const int I = static_cast<int>(A.rows()), J = static_cast<int>(B.rows()), R = static_cast<int>(A.cols());
  if (m > std::min({I, J, R})) throw InvalidArgument("phi: m exceeds min(I, J, R)");
  const int n = m + l;
  const std::uint64_t In = checked_pow(I, n), Jn = checked_pow(J, n);
  const auto tuples = enumerate_tuples(m, l, R);
  guard_entries(In * Jn, tuples.size(), max_entries, "phi");

  std::vector<std::vector<std::vector<int>>> perms;
  std::vector<double> prefactor;
  const double mf = static_cast<double>(factorial(m));
  for (const auto& tp : tuples) {
    perms.push_back(orderings(tp.tuple));
    prefactor.push_back(1.0 / (mf * mf));
  }
  const auto sp = signed_permutations(m);
  auto det_of = [&](const MatrixXd& X, const std::vector<int>& rows, const std::vector<int>& s) {
    double det = 0.0;
    for (const auto& p : sp) {
      double prod = p.sign;
      for (int q = 0; q < m; ++q) prod *= X(rows[p.perm[q]], s[q]);
      det += prod;
    }
    return det;
  };

  MatrixXd out = MatrixXd::Zero(static_cast<Eigen::Index>(In * Jn), static_cast<Eigen::Index>(tuples.size()));
  std::vector<int> is(n), js(n);
  for (std::uint64_t it = 0; it < In; ++it) {
    decode(it, I, is);
    if (!first_distinct(is, m)) continue;
    for (std::uint64_t jt = 0; jt < Jn; ++jt) {
      decode(jt, J, js);
      if (!first_distinct(js, m)) continue;
      const auto row = static_cast<Eigen::Index>(it * Jn + jt);
      for (std::size_t c = 0; c < tuples.size(); ++c) {
        double acc = 0.0;
        for (const auto& s : perms[c]) {
          double v = det_of(A, is, s);
          if (v == 0.0) continue;
          v *= det_of(B, js, s);
          for (int e = m; e < n; ++e) v *= A(is[e], s[e]) * B(js[e], s[e]);
          acc += v;
        }
        out(row, static_cast<Eigen::Index>(c)) = acc * prefactor[c];
      }
    }
  }
  return out;
}

MatrixXd phi_compact(const MatrixXd& A, const MatrixXd& B, int m, int l, std::size_t max_entries) {
  check_orders(m, l);
  if (A.cols() != B.cols()) throw InvalidArgument("phi_compact: A and B column counts differ");
  const int I = static_cast<int>(A.rows()), J = static_cast<int>(B.rows()), R = static_cast<int>(A.cols());
  if (m > std::min({I, J, R})) throw InvalidArgument("phi_compact: m exceeds min(I, J, R)");
  const int n = m + l;
  const auto isubs = combinations(I, m), jsubs = combinations(J, m);
  const auto extras = multisets(I * J, l);
  const auto tuples = enumerate_tuples(m, l, R);
  const std::uint64_t rows = isubs.size() * jsubs.size() * extras.size();
  guard_entries(rows, tuples.size(), max_entries, "phi_compact");

  const MatrixXd CA = compound(A, m), CB = compound(B, m);
  // For every ordering s of every tuple: the compound column of its head, or skip if the
  // first m entries repeat. Both determinants flip together, so the reordering sign cancels.
  struct Term {
    Eigen::Index col;
    std::vector<int> tail;
  };
  std::vector<std::vector<Term>> terms(tuples.size());
  std::vector<double> prefactor(tuples.size());
  const double mf = static_cast<double>(factorial(m));
  std::vector<int> head(m);
  for (std::size_t c = 0; c < tuples.size(); ++c) {
    prefactor[c] = 1.0 / (mf * mf);
    for (const auto& s : orderings(tuples[c].tuple)) {
      std::copy(s.begin(), s.begin() + m, head.begin());
      std::sort(head.begin(), head.end());
      if (std::adjacent_find(head.begin(), head.end()) != head.end()) continue;
      terms[c].push_back({static_cast<Eigen::Index>(combination_rank(head, R)),
                          std::vector<int>(s.begin() + m, s.end())});
    }
  }

  MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(tuples.size()));
  const double lf = static_cast<double>(factorial(l));
  Eigen::Index row = 0;
  for (std::size_t a = 0; a < isubs.size(); ++a)
    for (std::size_t b = 0; b < jsubs.size(); ++b)
      for (const auto& ex : extras) {
        const double w = mf * mf * lf / static_cast<double>(multiplicity_factorials(ex));
        const double scale = std::sqrt(w);
        for (std::size_t c = 0; c < tuples.size(); ++c) {
          double acc = 0.0;
          for (const auto& term : terms[c]) {
            double v = CA(static_cast<Eigen::Index>(a), term.col) *
                       CB(static_cast<Eigen::Index>(b), term.col);
            for (int e = 0; e < l; ++e) {
              const int i = ex[e] / J, j = ex[e] % J;
              v *= A(i, term.tail[e]) * B(j, term.tail[e]);
            }
            acc += v;
          }
          out(row, static_cast<Eigen::Index>(c)) = scale * prefactor[c] * acc;
        }
        ++row;
      }
  (void)n;
  return out;
}

MatrixXd s_matrix(const MatrixXd& C, int m, int l, std::size_t max_entries) {
  check_orders(m, l);
  const int K = static_cast<int>(C.rows()), R = static_cast<int>(C.cols());
  const int n = m + l;
  const std::uint64_t Kn = checked_pow(K, n);
  const auto tuples = enumerate_tuples(m, l, R);
  guard_entries(Kn, tuples.size(), max_entries, "s_matrix");
  const double nf = static_cast<double>(factorial(n));

  MatrixXd out = MatrixXd::Zero(static_cast<Eigen::Index>(Kn), static_cast<Eigen::Index>(tuples.size()));
  for (std::size_t c = 0; c < tuples.size(); ++c) {
    const double weight = static_cast<double>(multiplicity_factorials(tuples[c].tuple)) / nf;
    for (const auto& s : orderings(tuples[c].tuple)) {
      VectorXd v = C.col(s[0]);
      for (int p = 1; p < n; ++p) v = kronecker(v, C.col(s[p]));
      out.col(static_cast<Eigen::Index>(c)) += weight * v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Streaming Gram assembly
//
// For a row with i-tuple (is, extras_i) and j-tuple (js, extras_j) the
// contraction with x^{(x) n} is the polynomial
//   p(x) = (1/m!) det[T(x)_{is, js}] * prod_e T(x)_{i_e j_e},
// T(x) = sum_k x_k T(:,:,k). The coefficient of the monomial mu equals
// #orderings(mu) * R(row, mu), so the row expressed in the normalized
// symmetric basis is coef(mu) / sqrt(#orderings(mu)).

namespace {

class SymRowGenerator {
public:
  SymRowGenerator(const Tensor3d& t, int m, int l)
      : t_(t), m_(m), l_(l), n_(m + l), I_(static_cast<int>(t.rows())), J_(static_cast<int>(t.cols())),
        K_(static_cast<int>(t.depth())), mons_(K_, n_) {
    inv_sqrt_.resize(mons_.count(n_));
    const auto top = multisets(K_, n_);
    for (std::size_t c = 0; c < top.size(); ++c)
      inv_sqrt_[c] = 1.0 / std::sqrt(static_cast<double>(distinct_permutations(top[c])));
    isubs_ = combinations(I_, m_);
    jsubs_ = combinations(J_, m_);
    const double mf = static_cast<double>(factorial(m_));
    row_scale_ = std::sqrt(mf * mf) / mf;  // sqrt((m!)^2 multiplicity) times the 1/m! prefactor
    lf_ = static_cast<double>(factorial(l_));
  }

  std::size_t dim() const { return mons_.count(n_); }
  std::size_t subset_pairs() const { return isubs_.size() * jsubs_.size(); }

  /// Emits every nonredundant row derived from subset pair `pair`.
  template <typename Emit>
  void rows_for_pair(std::size_t pair, Emit&& emit) {
    const auto& is = isubs_[pair / jsubs_.size()];
    const auto& js = jsubs_[pair % jsubs_.size()];
    determinant_poly(is, js);
    const auto& det = masks_[(1u << m_) - 1];
    if (std::all_of(det.begin(), det.end(), [](double v) { return v == 0.0; })) return;
    levels_.resize(l_ + 1);
    levels_[0] = det;
    chosen_.assign(l_, 0);
    extend(0, 0, emit);
  }

private:
  const double* form(int i, int j) const { return t_.data().data() + (static_cast<Eigen::Index>(i) * J_ + j) * K_; }

  // dst += c * src * (linear form) for src of degree d.
  void mul_add(const std::vector<double>& src, int d, const double* lin, double c, std::vector<double>& dst) const {
    const std::size_t cnt = mons_.count(d);
    for (std::size_t idx = 0; idx < cnt; ++idx) {
      const double s = c * src[idx];
      if (s == 0.0) continue;
      for (int k = 0; k < K_; ++k) dst[mons_.times_var(d, idx, k)] += s * lin[k];
    }
  }

  void determinant_poly(const std::vector<int>& is, const std::vector<int>& js) {
    const unsigned full = 1u << m_;
    masks_.resize(full);
    masks_[0].assign(1, 1.0);
    for (int d = 0; d < m_; ++d) {
      for (unsigned mask = 0; mask < full; ++mask)
        if (std::popcount(mask) == d + 1) masks_[mask].assign(mons_.count(d + 1), 0.0);
      for (unsigned mask = 0; mask < full; ++mask) {
        if (std::popcount(mask) != d) continue;
        for (int q = 0; q < m_; ++q) {
          if (mask & (1u << q)) continue;
          const double sign = (std::popcount(mask >> (q + 1)) % 2) ? -1.0 : 1.0;
          mul_add(masks_[mask], d, form(is[d], js[q]), sign, masks_[mask | (1u << q)]);
        }
      }
    }
  }

  template <typename Emit>
  void extend(int depth, int start, Emit& emit) {
    if (depth == l_) {
      const auto& poly = levels_[l_];
      const double w = std::sqrt(lf_ / static_cast<double>(multiplicity_factorials(chosen_)));
      row_.resize(poly.size());
      for (std::size_t c = 0; c < poly.size(); ++c) row_[c] = poly[c] * inv_sqrt_[c] * w * row_scale_;
      emit(row_);
      return;
    }
    for (int p = start; p < I_ * J_; ++p) {
      chosen_[depth] = p;
      auto& next = levels_[depth + 1];
      next.assign(mons_.count(m_ + depth + 1), 0.0);
      mul_add(levels_[depth], m_ + depth, form(p / J_, p % J_), 1.0, next);
      extend(depth + 1, p, emit);
    }
  }

  const Tensor3d& t_;
  int m_, l_, n_, I_, J_, K_;
  MonomialTable mons_;
  std::vector<double> inv_sqrt_;
  std::vector<std::vector<int>> isubs_, jsubs_;
  double row_scale_ = 1.0;
  double lf_ = 1.0;
  std::vector<std::vector<double>> masks_;
  std::vector<std::vector<double>> levels_;
  std::vector<int> chosen_;
  std::vector<double> row_;
};

// Replaces the leading rows of `work` by the triangular factor of its first
// `rows` rows, diagonal nonnegative; remaining rows are left unspecified.
void retriangularize(MatrixXd& work, Eigen::Index rows) {
  const Eigen::Index d = work.cols();
  Eigen::Ref<MatrixXd> top = work.topRows(rows);
  Eigen::HouseholderQR<Eigen::Ref<MatrixXd>> qr(top);
  const Eigen::Index k = std::min(rows, d);
  MatrixXd r = MatrixXd::Zero(d, d);
  r.topRows(k) = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i)
    if (r(i, i) < 0) r.row(i) = -r.row(i);
  work.topRows(d) = r;
}

void check_gram_args(const Tensor3d& t, int m, int l) {
  check_orders(m, l);
  if (m > std::min(t.rows(), t.cols()))
    throw InvalidArgument("build_sym_gram: m exceeds min(I, J); R_{m,l} would vanish identically");
}

}  // namespace

GramOperator build_sym_gram(const Tensor3d& t, int m, int l, const GramOptions& opts) {
  check_gram_args(t, m, l);
  const int K = static_cast<int>(t.depth());
  const std::uint64_t D = sym_dim(K, m + l);
  if (D > static_cast<std::uint64_t>(opts.max_dim))
    throw ResourceLimit("build_sym_gram: symmetric dimension D = " + std::to_string(D) +
                        " exceeds the memory guard (" + std::to_string(opts.max_dim) + ")");
  const auto d = static_cast<Eigen::Index>(D);

  // Rows are buffered under the current triangular factor and the stack is
  // re-triangularized by Householder QR, so r^T r = G^T G without squaring.
  const Eigen::Index block = std::clamp<Eigen::Index>(d, 64, 2048);

  auto accumulate = [&](std::size_t begin, std::size_t stride, MatrixXd& r, std::uint64_t& groups) {
    SymRowGenerator gen(t, m, l);
    MatrixXd work = MatrixXd::Zero(d + block, d);
    Eigen::Index used = 0;
    auto flush = [&] {
      if (used == 0) return;
      retriangularize(work, d + used);
      work.bottomRows(block).setZero();
      used = 0;
    };
    for (std::size_t pair = begin; pair < gen.subset_pairs(); pair += stride) {
      gen.rows_for_pair(pair, [&](const std::vector<double>& row) {
        work.row(d + used++) = Eigen::Map<const VectorXd>(row.data(), d).transpose();
        ++groups;
        if (used == block) flush();
      });
    }
    flush();
    r = work.topRows(d);
  };

  GramOperator op;
  op.m = m;
  op.l = l;
  op.K = K;
  const int threads = std::max(1, opts.threads);
  if (threads == 1) {
    accumulate(0, 1, op.r, op.row_groups);
  } else {
    std::vector<MatrixXd> partial(threads);
    std::vector<std::uint64_t> groups(threads, 0);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] { accumulate(static_cast<std::size_t>(w), threads, partial[w], groups[w]); });
    for (auto& th : pool) th.join();
    MatrixXd stack(threads * d, d);
    op.row_groups = 0;
    for (int w = 0; w < threads; ++w) {
      stack.middleRows(w * d, d) = partial[w];
      op.row_groups += groups[w];
    }
    retriangularize(stack, stack.rows());
    op.r = stack.topRows(d);
  }
  return op;
}

MatrixXd sym_rml_rows(const Tensor3d& t, int m, int l, std::size_t max_entries) {
  check_gram_args(t, m, l);
  SymRowGenerator gen(t, m, l);
  std::vector<VectorXd> rows;
  for (std::size_t pair = 0; pair < gen.subset_pairs(); ++pair)
    gen.rows_for_pair(pair, [&](const std::vector<double>& row) {
      rows.emplace_back(Eigen::Map<const VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
      if (rows.size() * row.size() > max_entries) throw ResourceLimit("sym_rml_rows: too many entries");
    });
  MatrixXd G(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(gen.dim()));
  for (std::size_t r = 0; r < rows.size(); ++r) G.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return G;
}

}  // namespace algcpd
