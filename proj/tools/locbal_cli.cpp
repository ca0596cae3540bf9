// Copyright 2026 The locbal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// locbal: generate instances, run and verify balancers, run benchmark suites.
//
// Exit codes: 0 pass, 2 verification failure, 3 budget exceeded, 4 bad input.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "locbal/locbal.hpp"

namespace {

using namespace locbal;
using Q = Rational;

constexpr int kExitPass = 0;
constexpr int kExitVerify = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInput = 4;

const std::vector<std::string> kAlgorithms{"oracle",   "moving-average",   "match-and-balance",
                                           "path-a3", "general-discrete", "fractional"};
const std::vector<std::string> kSuites{"careful-bridge", "fractional-poly", "mab-quadratic", "oblivious-gap",
                                       "path-linear"};

struct GenCommand {
  std::string topology = "path";
  std::size_t n = 10;
  int L = 4;
  int delta = 3;
  std::uint64_t seed = 0;
  std::string load = "random";
  std::optional<std::size_t> split;
  std::optional<std::size_t> extra;
  std::string ports = "consistent";
  std::string out;
};

struct RunCommand {
  std::string instance;
  std::string algo = "path-a3";
  std::string eps;
  std::size_t max_rounds = 1000000;
  std::string arith = "exact";
  std::string policy = "edge-id";
  std::string out;
};

struct VerifyCommand {
  std::string instance;
  std::string result;
};

struct BenchCommand {
  std::string suite;
  std::uint64_t seed = 0;
  std::string out;
};

/// Thrown for errors that map to a specific exit code.
struct ExitError {
  int code;
  std::string message;
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw ExitError{kExitInput, "cannot write '" + path + "'"};
  return file;
}

LoadedGraph load_instance(const std::string& path) {
  if (path.empty() || path == "-") return read_instance(std::cin);
  std::ifstream in(path);
  if (!in) throw ExitError{kExitInput, "cannot read '" + path + "'"};
  return read_instance(in);
}

// ---- gen -----------------------------------------------------------------------

LoadedGraph generate(const GenCommand& o) {
  const PortScheme ports = o.ports == "adversarial" ? PortScheme::adversarial(o.seed) : PortScheme::consistent();
  LoadedGraph g;
  if (o.topology == "path") {
    g = build_path(o.n, ports, o.L);
  } else if (o.topology == "cycle") {
    g = build_cycle(o.n, ports, o.L);
  } else if (o.topology == "double-tree") {
    g = build_double_tree(o.delta, o.L);
  } else {
    g = build_random_graph(o.n, o.delta, o.seed, o.extra.value_or(o.n / 3), o.L);
  }
  const std::string load = o.load == "default" ? (o.topology == "double-tree" ? "keep" : "random") : o.load;
  if (load == "random") return random_load(g, o.L, o.seed);
  if (load == "zero") return g.with_loads(std::vector<int>(g.node_count(), 0), o.L);
  if (load == "full") return g.with_loads(std::vector<int>(g.node_count(), o.L), o.L);
  if (load == "step" || load == "step-low-high") {
    const std::size_t m = o.split.value_or(g.node_count() / 2 - (g.node_count() >= 2 ? 1 : 0));
    return step_load(g, m, o.L, load == "step" ? StepOrientation::kHighThenLow : StepOrientation::kLowThenHigh);
  }
  return g;
}

int cmd_gen(const GenCommand& o) {
  const auto g = generate(o);
  std::ofstream file;
  write_instance(open_output(o.out, file), g);
  return kExitPass;
}

// ---- run / verify ----------------------------------------------------------------

template <class Num>
int finish(const LoadedGraph& g, const BalancingResult<Num>& r, const RunCommand& o, int code_if_pass,
           Num tolerance = Num(0)) {
  if (!o.out.empty()) {
    std::ofstream file;
    write_result(open_output(o.out, file), g, {o.algo, o.arith}, r);
  }
  const auto report = check_feasible(g, r, tolerance);
  report.write(std::cout, g);
  std::cout << "metric rounds " << r.rounds << "\n";
  std::cout << "metric work " << format_number(work_accounting(r.transcript)) << "\n";
  std::cout << "metric completed " << (r.completed ? 1 : 0) << "\n";
  if (!r.completed) return kExitBudget;
  if (!report.pass()) return kExitVerify;
  if (r.rounds > o.max_rounds) {
    std::cerr << "budget exceeded: " << r.rounds << " rounds > --max-rounds " << o.max_rounds << "\n";
    return kExitBudget;
  }
  return code_if_pass;
}

template <class Num>
int emit(const LoadedGraph& g, const BalancingResult<Num>& r, const RunCommand& o) {
  if (o.arith == "float") {
    return finish<double>(g, convert_result<double>(r), o, kExitPass, 1e-9);
  }
  return finish<Q>(g, convert_result<Q>(r), o, kExitPass);
}

int cmd_run(const RunCommand& o) {
  const auto g = load_instance(o.instance);
  if (o.algo == "oracle") return emit(g, centralized_oracle(g), o);
  if (o.algo == "moving-average") return emit(g, moving_average(g), o);
  if (o.algo == "path-a3") return emit(g, run_a3(g), o);
  if (o.algo == "general-discrete") return emit(g, run_discrete(g), o);
  if (o.algo == "match-and-balance") {
    MatchAndBalanceOptions options;
    options.policy = o.policy == "largest-gap" ? MatcherPolicy::kLargestGap : MatcherPolicy::kEdgeId;
    options.max_rounds = o.max_rounds;
    try {
      return emit(g, match_and_balance(g, options).result, o);
    } catch (const BudgetExceeded<long long>& e) {
      std::cerr << "budget exceeded: " << e.what() << "\n";
      emit(g, e.partial(), o);
      return kExitBudget;
    }
  }
  // fractional
  const int L = std::max(1, g.max_load());
  if (o.arith == "float") {
    const double eps = o.eps.empty() ? 1.0 / (4 * L) : parse_number<double>(o.eps);
    return finish<double>(g, run_fractional<double>(g, eps), o, kExitPass, 1e-9);
  }
  const Q eps = o.eps.empty() ? Q(1, 4 * L) : parse_number<Q>(o.eps);
  return finish<Q>(g, run_fractional<Q>(g, eps), o, kExitPass);
}

int cmd_verify(const VerifyCommand& o) {
  const auto g = load_instance(o.instance);
  std::ifstream in(o.result);
  if (!in) throw ExitError{kExitInput, "cannot read '" + o.result + "'"};
  std::stringstream text;
  text << in.rdbuf();
  bool is_float = false;
  {
    std::istringstream probe(text.str());
    std::string line;
    while (std::getline(probe, line) && line != "locbal-transcript 1") is_float = is_float || line == "arith float";
  }
  bool pass = false;
  bool completed = true;
  if (is_float) {
    const auto r = read_result<double>(text);
    const auto report = check_feasible(g, r, 1e-9);
    report.write(std::cout, g);
    pass = report.pass();
    completed = r.completed;
  } else {
    const auto r = read_result<Q>(text);
    const auto report = check_feasible(g, r);
    report.write(std::cout, g);
    pass = report.pass();
    completed = r.completed;
  }
  if (!completed) return kExitBudget;
  return pass ? kExitPass : kExitVerify;
}

// ---- bench -----------------------------------------------------------------------------

struct Row {
  std::string topology;
  std::size_t n = 0;
  int L = 0;
  int delta = 0;
  std::uint64_t seed = 0;
  std::string algo;
  std::size_t rounds = 0;
  std::string work;
  std::string metric;
  std::string value;
  std::string bound;
  bool pass = true;

  auto key() const { return std::tie(topology, n, L, delta, seed, algo); }
};

std::string fixed(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << v;
  return out.str();
}

std::vector<Row> suite_mab_quadratic() {
  std::vector<Row> rows;
  for (int L : {8, 16, 32}) {
    const std::size_t n = 8 * static_cast<std::size_t>(L);
    const auto g = step_load(build_path(n, PortScheme::consistent(), L), n / 2 - 1, L, StepOrientation::kHighThenLow);
    for (auto policy : {MatcherPolicy::kEdgeId, MatcherPolicy::kLargestGap}) {
      const auto run = match_and_balance(g, {.policy = policy});
      const long long h = L / 2;
      const long long work = work_accounting(run.result.transcript);
      Row r{"path", n, L, 2, 0, std::string("match-and-balance/") + to_string(policy), run.result.rounds,
            std::to_string(work), "rounds_times_24_over_L2", fixed(24.0 * run.result.rounds / (L * L)), "1"};
      r.pass = check_feasible(g, run.result).pass() && 24 * run.result.rounds >= static_cast<std::size_t>(L * L) &&
               work >= tetrahedral(h);
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<Row> suite_path_linear(std::uint64_t seed) {
  std::vector<Row> rows;
  for (int L : {4, 8, 16, 32, 64}) {
    for (std::size_t n : {100, 1000}) {
      for (const char* topo : {"path", "cycle"}) {
        const auto shape = std::string(topo) == "path" ? build_path(n, PortScheme::adversarial(seed), L)
                                                       : build_cycle(n, PortScheme::adversarial(seed), L);
        const auto g = random_load(shape, L, seed);
        const auto r = run_a3(g);
        const double c = static_cast<double>(r.rounds) / L;
        Row row{topo, n, L, 2, seed, "path-a3", r.rounds, format_number(work_accounting(r.transcript)),
                "rounds_over_L", fixed(c), "100"};
        row.pass = check_feasible(g, r).pass() && c <= 100;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<Row> suite_oblivious_gap(std::uint64_t seed) {
  std::vector<Row> rows;
  SplitMix64 rng(seed);
  for (int d : {3, 4, 5}) {
    for (int L : {8, 12, 16, 24, 32}) {
      for (int trial = 0; trial < 5; ++trial) {
        const bool tight = trial == 0;
        const auto k = random_kernel(d, L, 1 + rng.below(4), rng, tight);
        const auto gap = oblivious_gap(k);
        const Q ratio = gap.gap / L;
        Row row{"d-regular-tree", 0, L, d, static_cast<std::uint64_t>(trial), tight ? "oblivious/tight" : "oblivious/random",
                0, "0", "gap_over_L", format_number(ratio), format_number(Q(d - 2, d))};
        row.pass = ratio >= Q(d - 2, d) && gap.gap == oblivious_gap_by_tree(k) && (!tight || ratio == Q(d - 2, d));
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<Row> suite_fractional_poly(std::uint64_t seed) {
  std::vector<Row> rows;
  for (int delta : {2, 3, 4}) {
    for (int L : {2, 4, 8}) {
      const std::size_t n = 40;
      const auto g = random_load(build_random_graph(n, delta, seed, n / 2), L, seed);
      const auto r = run_fractional<Q>(g, Q(1, 4 * L));
      const int log_delta = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(2, g.max_degree())))));
      const double c = static_cast<double>(r.rounds) / (static_cast<double>(L) * L * L * log_delta);
      Row row{"general", n, L, g.max_degree(), seed, "fractional", r.rounds, format_number(work_accounting(r.transcript)),
              "rounds_over_L3_logDelta", fixed(c), "60"};
      row.pass = check_feasible(g, r).pass() && c <= 60;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<Row> suite_careful_bridge() {
  std::vector<Row> rows;
  for (int L : {8, 12}) {
    const auto g = build_double_tree(3, L);
    const EdgeId bridge = *g.edge_between(g.bridge()->first, g.bridge()->second);
    const long long threshold = L == 8 ? 4 : 16;
    auto add = [&](const std::string& algo, const auto& r) {
      const Q flow = abs_value(Q(r.flow.stored(bridge)));
      Row row{"double-tree", g.node_count(), L, 3, 0, algo, r.rounds, format_number(work_accounting(r.transcript)),
              "bridge_flow", format_number(flow), std::to_string(threshold)};
      row.pass = check_feasible(g, r).pass() && flow >= Q(threshold);
      rows.push_back(row);
    };
    add("general-discrete", run_discrete(g));
    add("oracle", centralized_oracle(g));
    add("match-and-balance", match_and_balance(g).result);
    add("fractional", run_fractional<Q>(g, Q(1, 4 * L)));
  }
  return rows;
}

int cmd_bench(const BenchCommand& o) {
  std::vector<Row> rows;
  if (o.suite == "mab-quadratic") rows = suite_mab_quadratic();
  if (o.suite == "path-linear") rows = suite_path_linear(o.seed);
  if (o.suite == "oblivious-gap") rows = suite_oblivious_gap(o.seed);
  if (o.suite == "fractional-poly") rows = suite_fractional_poly(o.seed);
  if (o.suite == "careful-bridge") rows = suite_careful_bridge();
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key() < b.key(); });
  std::ofstream file;
  std::ostream& out = open_output(o.out, file);
  out << "suite,topology,n,L,delta,seed,algo,rounds,work,metric,value,bound,verdict\n";
  bool all = true;
  for (const auto& r : rows) {
    out << o.suite << ',' << r.topology << ',' << r.n << ',' << r.L << ',' << r.delta << ',' << r.seed << ','
        << r.algo << ',' << r.rounds << ',' << r.work << ',' << r.metric << ',' << r.value << ',' << r.bound << ','
        << (r.pass ? "pass" : "fail") << '\n';
    all = all && r.pass;
  }
  return all ? kExitPass : kExitVerify;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kBudgetExceeded: return kExitBudget;
    case ErrorKind::kProtocolViolation:
    case ErrorKind::kInternal: return kExitVerify;
    default: return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"locbal: local load balancing on graphs"};
  app.require_subcommand(1);

  GenCommand gen;
  auto* g = app.add_subcommand("gen", "generate an instance file");
  g->add_option("--topology", gen.topology, "graph family")
      ->check(CLI::IsMember({"path", "cycle", "double-tree", "random"}));
  g->add_option("--n", gen.n, "number of nodes (path, cycle, random)");
  g->add_option("--L", gen.L, "maximum load");
  g->add_option("--delta", gen.delta, "degree (double-tree) or maximum degree (random)");
  g->add_option("--seed", gen.seed, "seed for loads, random graphs and adversarial ports");
  g->add_option("--load", gen.load, "load pattern")
      ->check(CLI::IsMember({"default", "random", "step", "step-low-high", "zero", "full", "keep"}));
  g->add_option("--split", gen.split, "last node of the first step block");
  g->add_option("--extra", gen.extra, "extra edges attempted for random graphs (default n/3)");
  g->add_option("--ports", gen.ports, "port numbering")->check(CLI::IsMember({"consistent", "adversarial"}));
  g->add_option("--out", gen.out, "output file (default stdout)");
  gen.load = "default";

  RunCommand run;
  auto* r = app.add_subcommand("run", "run an algorithm and verify the result");
  r->add_option("instance", run.instance, "instance file ('-' for stdin)")->required();
  r->add_option("--algo", run.algo, "algorithm")->check(CLI::IsMember(kAlgorithms));
  r->add_option("--eps", run.eps, "fractional precision, at most 1/(4L) (default 1/(4L))");
  r->add_option("--max-rounds", run.max_rounds, "round budget");
  r->add_option("--arith", run.arith, "arithmetic for non-integral results")->check(CLI::IsMember({"exact", "float"}));
  r->add_option("--policy", run.policy, "match-and-balance matcher")->check(CLI::IsMember({"edge-id", "largest-gap"}));
  r->add_option("--out", run.out, "result file");

  VerifyCommand verify;
  auto* v = app.add_subcommand("verify", "verify a result file against an instance");
  v->add_option("instance", verify.instance, "instance file")->required();
  v->add_option("result", verify.result, "result file")->required();

  BenchCommand bench;
  auto* b = app.add_subcommand("bench", "run a benchmark suite and print CSV");
  b->add_option("suite", bench.suite, "suite name")->required()->check(CLI::IsMember(kSuites));
  b->add_option("--seed", bench.seed, "seed");
  b->add_option("--out", bench.out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*r) return cmd_run(run);
    if (*v) return cmd_verify(verify);
    return cmd_bench(bench);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}
