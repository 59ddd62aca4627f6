#pragma once

// Benchmark harness over random generic instances: one row per configuration.

#include <cstdint>
#include <string>
#include <vector>

#include "algcpd/cpd_algebraic.hpp"

namespace algcpd {

struct BenchConfig {
  int I = 0, J = 0, K = 0, R = 0;
  /// Published l and m for the row; -1 when unknown.
  int expected_l = -1;
  int expected_m = -1;
};

struct BenchRow {
  BenchConfig config;
  /// Most frequent l_used and m over successful trials; -1 without successes.
  int m = -1;
  int l = -1;
  /// Gram size C(K'+m+l-1, m+l) for the reported m, l; 0 without successes.
  std::uint64_t D = 0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_seconds = 0.0;
  double max_residual = 0.0;
  /// Distinct l values seen over successful trials, ascending.
  std::vector<int> l_values;
};

/// Rows I x J x (I-1)(J-1) with R = (I-1)(J-1) <= 24, I, J >= 3.
std::vector<BenchConfig> table1_suite();
/// Rows with K < R reached through m = R - K + 2.
std::vector<BenchConfig> table2_suite();

/// Gram size for a configuration at its published m and l; 0 if unknown.
std::uint64_t expected_gram_dim(const BenchConfig& c);

/// Runs auto_l on `trials` random standard normal instances. Trial t uses
/// seed derive_seed(seed, t) and trials run on `threads` workers, so results
/// do not depend on the thread count.
BenchRow run_bench_row(const BenchConfig& c, int trials, std::uint64_t seed, int threads = 1,
                       const CpdOptions& opts = {});

std::string bench_csv_header();
std::string bench_csv_line(const BenchRow& row);

}  // namespace algcpd
