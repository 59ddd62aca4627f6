#include "algcpd/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "algcpd/errors.hpp"

namespace algcpd::io {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'P', 'D', '3'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
T from_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw InvalidArgument(std::string("CPD3: truncated ") + what);
  return from_le(v);
}

template <typename T>
void write_le(std::ostream& out, T v) {
  v = from_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Tensor3d read_cpd3(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw InvalidArgument("CPD3: bad magic bytes");
  if (read_le<std::uint8_t>(in, "version") != kVersion) throw InvalidArgument("CPD3: unsupported version");
  std::array<std::uint32_t, 3> dims{};
  for (auto& d : dims) d = read_le<std::uint32_t>(in, "header");
  for (auto d : dims)
    if (d == 0) throw InvalidArgument("CPD3: zero dimension");
  const std::uint64_t count = std::uint64_t{dims[0]} * dims[1] * dims[2];
  if (count > (std::uint64_t{1} << 31)) throw InvalidArgument("CPD3: tensor too large");
  VectorXd data(static_cast<Eigen::Index>(count));
  for (std::uint64_t n = 0; n < count; ++n) {
    const auto bits = read_le<std::uint64_t>(in, "data");
    data(static_cast<Eigen::Index>(n)) = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw InvalidArgument("CPD3: trailing bytes after data");
  return Tensor3d(dims[0], dims[1], dims[2], std::move(data));
}

Tensor3d read_cpd3_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  return read_cpd3(in);
}

void write_cpd3(std::ostream& out, const Tensor3d& t) {
  out.write(kMagic.data(), 4);
  write_le<std::uint8_t>(out, kVersion);
  for (auto d : t.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("CPD3: dimension exceeds u32");
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (Eigen::Index n = 0; n < t.data().size(); ++n) write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(t.data()(n)));
  if (!out) throw Error("CPD3: write failed");
}

void write_cpd3_file(const std::string& path, const Tensor3d& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_cpd3(out, t);
}

void write_gram_file(const std::string& path, const GramOperator& g) {
  const MatrixXd q = g.q();
  const RowMat<double> rm = q;
  write_cpd3_file(path, Tensor3d(q.rows(), q.cols(), 1, Eigen::Map<const VectorXd>(rm.data(), rm.size())));
}

nlohmann::json matrix_to_json(const MatrixXd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw InvalidArgument("matrix JSON needs rows, cols and data");
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer() || !j["data"].is_array())
    throw InvalidArgument("matrix JSON has wrongly typed fields");
  const auto rows = j["rows"].get<long long>(), cols = j["cols"].get<long long>();
  if (rows < 1 || cols < 1) throw InvalidArgument("matrix JSON dimensions must be positive");
  const auto& data = j["data"];
  if (static_cast<long long>(data.size()) != rows * cols) throw InvalidArgument("matrix JSON data length mismatch");
  MatrixXd m(rows, cols);
  for (long long n = 0; n < rows * cols; ++n) {
    if (!data[n].is_number()) throw InvalidArgument("matrix JSON data must be numeric");
    m(n / cols, n % cols) = data[n].get<double>();
  }
  return m;
}

nlohmann::json factors_to_json(const FactorTripled& f) {
  return {{"A", matrix_to_json(f.A())}, {"B", matrix_to_json(f.B())}, {"C", matrix_to_json(f.C())}};
}

FactorTripled factors_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("A") || !j.contains("B") || !j.contains("C"))
    throw InvalidArgument("factors JSON needs A, B and C");
  return FactorTripled(matrix_from_json(j["A"]), matrix_from_json(j["B"]), matrix_from_json(j["C"]));
}

FactorTripled read_factors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
  return factors_from_json(j);
}

nlohmann::json result_to_json(const CpdResult& r) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : r.attempts) attempts.push_back({{"l", a.l}, {"kernel_dim", a.kernel_dim}, {"reason", a.reason}});
  nlohmann::json diag = nlohmann::json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
  return {{"factors", factors_to_json(r.factors)},
          {"l_used", r.l_used},
          {"m", r.m},
          {"kernel_dim", r.kernel_dim},
          {"gram_dim", r.gram_dim},
          {"residual", r.residual},
          {"diagnostics", std::move(diag)},
          {"rejected", std::move(attempts)}};
}

nlohmann::json report_to_json(const UniquenessReport& r) {
  nlohmann::json phi = nlohmann::json::array();
  for (const auto& [key, ok] : r.phi_u_full_rank) phi.push_back({{"k", key.first}, {"l", key.second}, {"full_rank", ok}});
  return {{"k_A", r.k_A},
          {"k_B", r.k_B},
          {"k_C", r.k_C},
          {"r_C", r.r_C},
          {"m", r.m},
          {"kruskal_holds", r.kruskal_holds},
          {"compound_holds", r.compound_holds},
          {"k_C_positive", r.k_C_positive},
          {"ab_full_rank", r.ab_full_rank},
          {"phi_u_full_rank", std::move(phi)},
          {"min_k_rank_ok", r.min_k_rank_ok},
          {"all_k_holds", r.all_k_holds},
          {"single_m_holds", r.single_m_holds},
          {"uniq_via_one_fm", r.uniq_via_one_fm},
          {"verdict", to_string(r.verdict)}};
}

nlohmann::json bounds_to_json(const std::vector<GenericBound>& b) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : b)
    out.push_back({{"name", x.name}, {"value", x.value}, {"applicable", x.applicable}, {"note", x.note}});
  return out;
}

}  // namespace algcpd::io
