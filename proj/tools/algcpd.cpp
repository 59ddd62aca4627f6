#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "algcpd/bench.hpp"
#include "algcpd/conditions.hpp"
#include "algcpd/cpd_algebraic.hpp"
#include "algcpd/errors.hpp"
#include "algcpd/io.hpp"
#include "algcpd/multilinear.hpp"
#include "algcpd/random.hpp"
#include "algcpd/structured_maps.hpp"

namespace {

using namespace algcpd;

enum Exit : int { kOk = 0, kMalformed = 1, kCondition = 2, kVerification = 3, kOther = 4 };

int worker_count(int requested) {
  if (const char* env = std::getenv("CPD_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1, requested);
}

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("not an integer list: " + s);
    }
  }
  return out;
}

// Maps library errors to exit codes; the message goes to stderr.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMalformed;
  } catch (const ConditionViolation& e) {
    nlohmann::json j{{"status", "condition-violation"}, {"message", e.what()}};
    if (e.found_dim() >= 0) j["kernel_dim"] = e.found_dim();
    std::cout << j.dump(2) << '\n';
    std::cerr << "condition violation: " << e.what() << '\n';
    return kCondition;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kVerification;
  } catch (const RankDeficiency& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kVerification;
  } catch (const Degeneracy& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kVerification;
  } catch (const RecoveryFailure& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}

struct DecomposeArgs {
  std::string input, out, l = "auto";
  long rank = 0;
  int l_max = 3;
  std::uint64_t seed = 1;
  double tol_kernel = 1e-12;
  int threads = 1;
};

int cmd_decompose(const DecomposeArgs& a) {
  const Tensor3d t = io::read_cpd3_file(a.input);
  CpdOptions opts;
  opts.l_max = a.l_max;
  opts.seed = a.seed;
  opts.kernel.tol_kernel = a.tol_kernel;
  opts.gram.threads = worker_count(a.threads);
  CpdResult res;
  if (a.l == "auto") {
    res = auto_l(t, a.rank, opts);
  } else {
    const auto l = parse_int_list(a.l);
    if (l.size() != 1 || l[0] < 0) throw InvalidArgument("--l must be 'auto' or a nonnegative integer");
    res = decompose(t, a.rank, l[0], opts);
  }
  nlohmann::json j = io::result_to_json(res);
  j["status"] = "ok";
  if (!a.out.empty()) {
    write_json(io::factors_to_json(res.factors), a.out);
    j.erase("factors");
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_certify(const std::string& input, const std::string& schedule, const std::string& out) {
  const FactorTripled f = io::read_factors_file(input);
  const auto rep = check_uniqueness(f, schedule.empty() ? std::vector<int>{} : parse_int_list(schedule));
  nlohmann::json j = io::report_to_json(rep);
  const auto I = static_cast<int>(f.A().rows()), J = static_cast<int>(f.B().rows()),
             K = static_cast<int>(f.C().rows());
  if (std::min({I, J, K}) >= 2) j["generic_bounds"] = io::bounds_to_json(generic_bounds(I, J, K));
  write_json(j, out);
  return kOk;
}

struct BenchArgs {
  std::string suite = "table1", dims, out;
  long rank = 0;
  int trials = 20, threads = 1, l_max = 3;
  std::uint64_t seed = 1;
  bool big = false, json = false;
};

int cmd_bench(const BenchArgs& a) {
  std::vector<BenchConfig> rows;
  if (a.suite == "table1") {
    rows = table1_suite();
  } else if (a.suite == "table2") {
    rows = table2_suite();
  } else if (a.suite == "custom") {
    const auto d = parse_int_list(a.dims);
    if (d.size() != 3 || a.rank < 1) throw InvalidArgument("custom suite needs --dims I,J,K and --rank");
    rows.push_back({d[0], d[1], d[2], static_cast<int>(a.rank), -1, -1});
  } else {
    throw InvalidArgument("unknown suite " + a.suite);
  }
  CpdOptions opts;
  opts.l_max = a.l_max;
  const int threads = worker_count(a.threads);
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error("cannot open " + a.out + " for writing");
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  nlohmann::json all = nlohmann::json::array();
  if (!a.json) out << bench_csv_header() << '\n';
  for (const auto& c : rows) {
    if (!a.big && expected_gram_dim(c) > 6000) {
      std::cerr << "skipping " << c.I << "x" << c.J << "x" << c.K << " R=" << c.R << " (D = " << expected_gram_dim(c)
                << " > 6000, pass --big)\n";
      continue;
    }
    const BenchRow row = run_bench_row(c, a.trials, a.seed, threads, opts);
    if (a.json) {
      all.push_back({{"I", c.I}, {"J", c.J}, {"K", c.K}, {"R", c.R}, {"m", row.m}, {"l", row.l}, {"D", row.D},
                     {"expected_l", c.expected_l}, {"expected_m", c.expected_m}, {"trials", row.trials},
                     {"successes", row.successes}, {"success_rate", row.success_rate},
                     {"mean_seconds", row.mean_seconds}, {"max_residual", row.max_residual},
                     {"l_values", row.l_values}});
    } else {
      out << bench_csv_line(row) << std::endl;
    }
  }
  if (a.json) out << all.dump(2) << '\n';
  return kOk;
}

int cmd_synth(const std::string& dims, long rank, std::uint64_t seed, const std::string& out,
              const std::string& factors_out) {
  const auto d = parse_int_list(dims);
  if (d.size() != 3 || rank < 1) throw InvalidArgument("synth needs --dims I,J,K and --rank R");
  Rng rng(seed);
  const FactorTripled f = random_factors(d[0], d[1], d[2], rank, rng);
  io::write_cpd3_file(out, synthesize(f));
  if (!factors_out.empty()) write_json(io::factors_to_json(f), factors_out);
  return kOk;
}

int cmd_gram_export(const std::string& input, int m, int l, const std::string& out, int threads) {
  const Tensor3d t = io::read_cpd3_file(input);
  GramOptions opts;
  opts.threads = worker_count(threads);
  const auto g = build_sym_gram(mode3_compress(t).tensor, m, l, opts);
  io::write_gram_file(out, g);
  std::cout << nlohmann::json{{"D", g.dim()}, {"row_groups", g.row_groups}}.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algebraic canonical polyadic decomposition of third-order tensors"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* sd = app.add_subcommand("decompose", "Decompose a CPD3 tensor into R rank-one terms");
  sd->add_option("input", dec.input, "CPD3 tensor file")->required();
  sd->add_option("--rank,-R", dec.rank, "Number of rank-one terms")->required()->check(CLI::PositiveNumber);
  sd->add_option("--l", dec.l, "Extra order l, or 'auto' to try 0..l-max");
  sd->add_option("--l-max", dec.l_max, "Largest l tried by --l auto")->check(CLI::NonNegativeNumber);
  sd->add_option("--seed", dec.seed, "Seed for the hyperplane search");
  sd->add_option("--tol-kernel", dec.tol_kernel, "Relative singular value threshold of the kernel");
  sd->add_option("--threads", dec.threads, "Gram assembly threads (CPD_THREADS overrides)");
  sd->add_option("--out", dec.out, "Write factors JSON here");

  std::string cert_in, cert_sched, cert_out;
  auto* sc = app.add_subcommand("certify", "Evaluate uniqueness certificates for a factor triple");
  sc->add_option("input", cert_in, "Factors JSON")->required();
  sc->add_option("--l-schedule", cert_sched, "Comma separated l_1,...,l_m (default all 0)");
  sc->add_option("--out", cert_out, "Write the report here instead of stdout");

  BenchArgs bench;
  auto* sb = app.add_subcommand("bench", "Run the benchmark suites");
  sb->add_option("--suite", bench.suite, "table1, table2 or custom")
      ->check(CLI::IsMember({"table1", "table2", "custom"}));
  sb->add_option("--trials", bench.trials, "Trials per row")->check(CLI::PositiveNumber);
  sb->add_option("--seed", bench.seed, "Base seed");
  sb->add_option("--dims", bench.dims, "I,J,K for the custom suite");
  sb->add_option("--rank", bench.rank, "R for the custom suite");
  sb->add_option("--l-max", bench.l_max, "Largest l tried")->check(CLI::NonNegativeNumber);
  sb->add_option("--threads", bench.threads, "Trial workers (CPD_THREADS overrides)");
  sb->add_flag("--big", bench.big, "Include rows with Gram size above 6000");
  sb->add_flag("--json", bench.json, "Emit JSON instead of CSV");
  sb->add_option("--out", bench.out, "Write output here instead of stdout");

  std::string syn_dims, syn_out, syn_factors;
  long syn_rank = 0;
  std::uint64_t syn_seed = 1;
  auto* ss = app.add_subcommand("synth", "Write a random rank-R tensor in CPD3 format");
  ss->add_option("--dims", syn_dims, "I,J,K")->required();
  ss->add_option("--rank,-R", syn_rank, "Number of rank-one terms")->required()->check(CLI::PositiveNumber);
  ss->add_option("--seed", syn_seed, "Seed");
  ss->add_option("--out", syn_out, "Output CPD3 file")->required();
  ss->add_option("--factors-out", syn_factors, "Also write the generating factors as JSON");

  std::string ge_in, ge_out;
  int ge_m = 2, ge_l = 0, ge_threads = 1;
  auto* sg = app.add_subcommand("gram-export", "Export the Gram matrix of the mode-3 compressed tensor");
  sg->add_option("input", ge_in, "CPD3 tensor file")->required();
  sg->add_option("--m", ge_m, "Order m")->check(CLI::PositiveNumber);
  sg->add_option("--l", ge_l, "Extra order l")->check(CLI::NonNegativeNumber);
  sg->add_option("--out", ge_out, "Output CPD3 file (D x D x 1)")->required();
  sg->add_option("--threads", ge_threads, "Gram assembly threads (CPD_THREADS overrides)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kMalformed;
  }

  if (*sd) return guarded([&] { return cmd_decompose(dec); });
  if (*sc) return guarded([&] { return cmd_certify(cert_in, cert_sched, cert_out); });
  if (*sb) return guarded([&] { return cmd_bench(bench); });
  if (*ss) return guarded([&] { return cmd_synth(syn_dims, syn_rank, syn_seed, syn_out, syn_factors); });
  if (*sg) return guarded([&] { return cmd_gram_export(ge_in, ge_m, ge_l, ge_out, ge_threads); });
  return kMalformed;
}
