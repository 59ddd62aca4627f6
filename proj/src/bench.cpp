#include "algcpd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <thread>

#include "algcpd/errors.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/random.hpp"
#include "algcpd/structured_maps.hpp"

namespace algcpd {

namespace {

struct TrialOutcome {
  bool ok = false;
  int m = -1;
  int l = -1;
  std::uint64_t D = 0;
  double seconds = 0.0;
  double residual = 0.0;
};

TrialOutcome run_trial(const BenchConfig& c, std::uint64_t seed, const CpdOptions& opts) {
  Rng rng(seed);
  const Tensor3d t = synthesize(random_factors(c.I, c.J, c.K, c.R, rng));
  TrialOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const CpdResult res = auto_l(t, c.R, opts);
    out.ok = true;
    out.m = res.m;
    out.l = res.l_used;
    out.D = static_cast<std::uint64_t>(res.gram_dim);
    out.residual = res.residual;
  } catch (const Error&) {
    out.ok = false;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

int mode_of(const std::vector<int>& v) {
  std::map<int, int> count;
  for (int x : v) ++count[x];
  int best = -1, freq = 0;
  for (const auto& [x, n] : count)
    if (n > freq) best = x, freq = n;
  return best;
}

}  // namespace

std::vector<BenchConfig> table1_suite() {
  const std::vector<std::tuple<int, int, int>> rows{
      {3, 3, 0},  {3, 4, 0},  {3, 5, 0},  {3, 6, 0}, {3, 7, 1}, {3, 8, 1}, {3, 9, 1},
      {3, 10, 1}, {3, 11, 1}, {3, 12, 1}, {3, 13, 1}, {4, 4, 0}, {4, 5, 1}, {4, 6, 1},
      {4, 7, 2},  {4, 8, 2},  {4, 9, 2},  {5, 5, 1}, {5, 6, 2}, {5, 7, 2}};
  std::vector<BenchConfig> out;
  for (const auto& [I, J, l] : rows) {
    const int R = (I - 1) * (J - 1);
    out.push_back({I, J, R, R, l, 2});
  }
  return out;
}

std::vector<BenchConfig> table2_suite() {
  return {{4, 5, 6, 7, 1, 3},   {5, 7, 7, 9, 1, 4},  {6, 9, 8, 11, 1, 5}, {7, 7, 7, 10, 1, 5},
          {4, 6, 8, 9, 1, 3},   {4, 7, 10, 11, 1, 3}, {5, 6, 6, 8, 2, 4},  {5, 7, 8, 10, 2, 4}};
}

std::uint64_t expected_gram_dim(const BenchConfig& c) {
  if (c.expected_l < 0 || c.expected_m < 0) return 0;
  return sym_dim(c.K, c.expected_m + c.expected_l);
}

BenchRow run_bench_row(const BenchConfig& c, int trials, std::uint64_t seed, int threads, const CpdOptions& opts) {
  if (trials < 1) throw InvalidArgument("run_bench_row: trials must be positive");
  threads = std::clamp(threads, 1, trials);
  const std::uint64_t row_seed = derive_seed(seed, (static_cast<std::uint64_t>(c.I) << 48) ^
                                                       (static_cast<std::uint64_t>(c.J) << 32) ^
                                                       (static_cast<std::uint64_t>(c.K) << 16) ^ c.R);
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++)
      outcomes[t] = run_trial(c, derive_seed(row_seed, static_cast<std::uint64_t>(t)), opts);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  BenchRow row;
  row.config = c;
  row.trials = trials;
  std::vector<int> ls, ms;
  std::map<int, std::uint64_t> d_of_l;
  double total = 0.0;
  for (const auto& o : outcomes) {
    total += o.seconds;
    if (!o.ok) continue;
    ++row.successes;
    ls.push_back(o.l);
    ms.push_back(o.m);
    d_of_l[o.l] = o.D;
    row.max_residual = std::max(row.max_residual, o.residual);
  }
  row.success_rate = static_cast<double>(row.successes) / trials;
  row.mean_seconds = total / trials;
  if (row.successes > 0) {
    row.l = mode_of(ls);
    row.m = mode_of(ms);
    row.D = d_of_l[row.l];
    row.l_values = ls;
    std::sort(row.l_values.begin(), row.l_values.end());
    row.l_values.erase(std::unique(row.l_values.begin(), row.l_values.end()), row.l_values.end());
  }
  return row;
}

std::string bench_csv_header() { return "I,J,K,R,m,l,D,success_rate,mean_seconds,max_residual"; }

std::string bench_csv_line(const BenchRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%d,%llu,%.4f,%.6f,%.3e", row.config.I, row.config.J, row.config.K,
                row.config.R, row.m, row.l, static_cast<unsigned long long>(row.D), row.success_rate, row.mean_seconds,
                row.max_residual);
  return buf;
}

}  // namespace algcpd
