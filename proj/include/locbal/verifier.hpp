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

#ifndef LOCBAL_VERIFIER_HPP_
#define LOCBAL_VERIFIER_HPP_

// Ground-truth checks for balancing results: conservation, happiness, range,
// integrality and transcript consistency, plus splice-based locality tests.

#include <algorithm>
#include <array>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/graph.hpp"

namespace locbal {

enum class Check { kConservation, kHappiness, kRange, kIntegrality, kTranscript };

inline constexpr std::array<Check, 5> kAllChecks = {Check::kConservation, Check::kHappiness,
                                                    Check::kRange, Check::kIntegrality,
                                                    Check::kTranscript};

inline const char* to_string(Check c) {
  switch (c) {
    case Check::kConservation: return "conservation";
    case Check::kHappiness: return "happiness";
    case Check::kRange: return "range";
    case Check::kIntegrality: return "integrality";
    case Check::kTranscript: return "transcript";
  }
  return "?";
}

/// A concrete violation: a node or an edge and the offending value.
struct Witness {
  bool is_edge = false;
  std::size_t id = 0;
  std::string value;

  std::string describe(const LoadedGraph& g) const {
    std::ostringstream out;
    if (is_edge) {
      const auto& [a, b] = g.edges().at(id);
      out << "edge " << id << " (" << a << "," << b << ") " << value;
    } else {
      out << "node " << id << " " << value;
    }
    return out.str();
  }
};

struct CheckVerdict {
  Check check = Check::kConservation;
  bool applicable = true;
  bool pass = true;
  std::size_t violations = 0;
  std::vector<Witness> witnesses{};  // the first few violations
};

struct VerifierReport {
  static constexpr std::size_t kMaxWitnesses = 8;

  std::vector<CheckVerdict> checks;
  std::string tolerance = "0";

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckVerdict& c) { return c.pass; });
  }
  const CheckVerdict& verdict(Check c) const {
    for (const auto& v : checks) {
      if (v.check == c) return v;
    }
    throw Error(ErrorKind::kOutOfRange, "no such check");
  }
  std::vector<Check> failed() const {
    std::vector<Check> out;
    for (const auto& v : checks) {
      if (!v.pass) out.push_back(v.check);
    }
    return out;
  }

  /// Line-oriented text: a verdict line, one line per check, one per witness.
  void write(std::ostream& out, const LoadedGraph& g) const {
    out << "verdict " << (pass() ? "pass" : "fail") << "\n";
    out << "tolerance " << tolerance << "\n";
    for (const auto& c : checks) {
      out << "check " << to_string(c.check) << " "
          << (!c.applicable ? "skipped" : c.pass ? "pass" : "fail") << " violations " << c.violations
          << "\n";
      for (const auto& w : c.witnesses) out << "witness " << to_string(c.check) << " " << w.describe(g) << "\n";
    }
  }
};

namespace detail {

inline void add_violation(CheckVerdict& v, Witness w) {
  v.pass = false;
  ++v.violations;
  if (v.witnesses.size() < VerifierReport::kMaxWitnesses) v.witnesses.push_back(std::move(w));
}

}  // namespace detail

/// Verifies a result against the instance's own loads. Conservation and
/// range use `tolerance`; happiness is always checked as <= 1 exactly.
template <class Num>
VerifierReport check_feasible(const LoadedGraph& graph, const BalancingResult<Num>& result,
                              const Num& tolerance = Num(0)) {
  const std::size_t n = graph.node_count();
  if (result.outputs.size() != n || result.flow.size() != graph.edge_count()) {
    throw Error(ErrorKind::kDimensionMismatch, "result does not match the graph");
  }
  VerifierReport report;
  report.tolerance = format_number(tolerance);
  CheckVerdict conservation{Check::kConservation}, happiness{Check::kHappiness}, range{Check::kRange},
      integrality{Check::kIntegrality}, transcript{Check::kTranscript};

  const auto in = result.flow.inflow(graph);
  for (NodeId v = 0; v < n; ++v) {
    const Num expected = Num(graph.load(v)) + in[v];
    const Num diff = abs_value(Num(expected - result.outputs[v]));
    if (diff > tolerance) {
      detail::add_violation(conservation, {false, v,
                                           "y=" + format_number(result.outputs[v]) +
                                               " x+inflow=" + format_number(expected)});
    }
    const Num& y = result.outputs[v];
    if (y < -tolerance || y > Num(graph.max_load()) + tolerance) {
      detail::add_violation(range, {false, v, "y=" + format_number(y) + " L=" + std::to_string(graph.max_load())});
    }
  }
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    const auto& [a, b] = graph.edges()[e];
    const Num gap = abs_value(Num(result.outputs[a] - result.outputs[b]));
    if (gap > Num(1)) detail::add_violation(happiness, {true, e, "gap=" + format_number(gap)});
  }
  integrality.applicable = result.discrete;
  if (result.discrete) {
    for (NodeId v = 0; v < n; ++v) {
      if (!is_integral_value(result.outputs[v])) {
        detail::add_violation(integrality, {false, v, "y=" + format_number(result.outputs[v])});
      }
    }
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      if (!is_integral_value(result.flow.stored(e))) {
        detail::add_violation(integrality, {true, e, "f=" + format_number(result.flow.stored(e))});
      }
    }
  }
  // A transcript, when present, must replay to the flow within the rounds.
  bool has_moves = false;
  for (const auto& r : result.transcript.rounds_moves) has_moves = has_moves || !r.empty();
  transcript.applicable = has_moves;
  if (has_moves) {
    for (std::size_t r = result.rounds; r < result.transcript.rounds_moves.size(); ++r) {
      for (const auto& m : result.transcript.rounds_moves[r]) {
        detail::add_violation(transcript, {true, m.edge, "moved in round " + std::to_string(r + 1) +
                                                             " after " + std::to_string(result.rounds)});
      }
    }
    const Flow<Num> replay = result.transcript.replay(graph.edge_count());
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      const Num diff = abs_value(Num(replay.stored(e) - result.flow.stored(e)));
      if (diff > tolerance) {
        detail::add_violation(transcript, {true, e,
                                           "replay=" + format_number(replay.stored(e)) +
                                               " f=" + format_number(result.flow.stored(e))});
      }
    }
  }
  report.checks = {conservation, happiness, range, integrality, transcript};
  return report;
}

/// True iff y(i) >= y(j) for all i <= j.
template <class Num>
bool check_monotone(const std::vector<Num>& loads) {
  for (std::size_t i = 0; i + 1 < loads.size(); ++i) {
    if (loads[i] < loads[i + 1]) return false;
  }
  return true;
}

/// True iff the radius-R balls around both endpoints of `probe` are the same
/// in both instances: same nodes at the same distances, same loads, and the
/// same port tables on nodes strictly inside the ball.
inline bool balls_agree(const LoadedGraph& a, const LoadedGraph& b, EdgeId probe, std::size_t radius) {
  if (probe >= a.edge_count() || probe >= b.edge_count() || a.edges()[probe] != b.edges()[probe]) {
    return false;
  }
  if (a.max_load() != b.max_load()) return false;
  const auto [u, v] = a.edges()[probe];
  for (NodeId center : {u, v}) {
    const auto da = bfs_distances(a, center, radius);
    const auto db = bfs_distances(b, center, radius);
    const std::size_t common = std::min(da.size(), db.size());
    for (NodeId w = 0; w < std::max(da.size(), db.size()); ++w) {
      const std::size_t x = w < da.size() ? da[w] : kUnreachable;
      const std::size_t y = w < db.size() ? db[w] : kUnreachable;
      if (x != y) return false;
      if (x == kUnreachable || w >= common) continue;
      if (a.load(w) != b.load(w)) return false;
      if (x < radius && a.ports(w) != b.ports(w)) return false;
    }
  }
  return true;
}

/// Runs `algorithm` on both instances and reports whether the flow on the
/// probe edge is identical. The instances must agree on the radius-R ball
/// around the probe edge.
template <class Num>
bool splice_locality_test(const std::function<BalancingResult<Num>(const LoadedGraph&)>& algorithm,
                          const LoadedGraph& first, const LoadedGraph& second, std::size_t radius,
                          EdgeId probe) {
  if (!balls_agree(first, second, probe, radius)) {
    throw Error(ErrorKind::kInvalidTest, "instances differ inside the radius-" + std::to_string(radius) + " ball");
  }
  const auto ra = algorithm(first);
  const auto rb = algorithm(second);
  return ra.flow.stored(probe) == rb.flow.stored(probe);
}

/// The three inputs of the linear lower bound on a path: all-empty x0,
/// all-full xL, and the step x that looks like x0 around l and like xL
/// around r, with dist(l, r) = L - 1 and agreement radius h = floor(L/2) - 1.
template <class Num>
struct LowerBoundTriple {
  NodeId left = 0;
  NodeId right = 0;
  std::size_t h = 0;
  Num y0_left{0}, yL_right{0}, y_left{0}, y_right{0};
  bool balls_match = false;
  /// y(l) != y0(l) or y(r) != yL(r).
  bool changed = false;
};

template <class Num>
LowerBoundTriple<Num> lower_bound_triple(
    const std::function<BalancingResult<Num>(const LoadedGraph&)>& algorithm, std::size_t n, int L) {
  if (L < 4) throw Error(ErrorKind::kInvalidParameter, "the lower-bound triple needs L >= 4");
  const auto path = build_path(n, PortScheme::consistent(), L);
  const auto x0 = path.with_loads(std::vector<int>(n, 0), L);
  const auto xL = path.with_loads(std::vector<int>(n, L), L);
  const auto y0 = algorithm(x0);
  const auto yL = algorithm(xL);
  LowerBoundTriple<Num> t;
  t.h = static_cast<std::size_t>(L / 2 - 1);
  const auto span = static_cast<std::size_t>(L - 1);
  bool found = false;
  // Prefer a pair near the middle, away from the ends.
  for (std::size_t off = 0; off + span < n && !found; ++off) {
    for (int side : {1, -1}) {
      const long long l = static_cast<long long>((n - span) / 2) + side * static_cast<long long>(off);
      if (l < 0 || static_cast<std::size_t>(l) + span >= n) continue;
      const auto ln = static_cast<NodeId>(l);
      if (y0.outputs[ln] == Num(0) && yL.outputs[ln + span] >= Num(L)) {
        t.left = ln;
        t.right = ln + span;
        found = true;
        break;
      }
    }
  }
  if (!found) throw Error(ErrorKind::kInvalidTest, "no pair l, r at distance L - 1");
  const std::size_t mid = t.left + static_cast<std::size_t>(L / 2 - 1);
  const auto x = step_load(path, mid, L, StepOrientation::kLowThenHigh);
  // Agreement of the h-balls, checked node by node.
  t.balls_match = true;
  for (std::size_t k = 0; k <= t.h; ++k) {
    for (long long s : {-1LL, 1LL}) {
      const long long pl = static_cast<long long>(t.left) + s * static_cast<long long>(k);
      const long long pr = static_cast<long long>(t.right) + s * static_cast<long long>(k);
      if (pl >= 0 && pl < static_cast<long long>(n) && x.load(pl) != x0.load(pl)) t.balls_match = false;
      if (pr >= 0 && pr < static_cast<long long>(n) && x.load(pr) != xL.load(pr)) t.balls_match = false;
    }
  }
  const auto y = algorithm(x);
  t.y0_left = y0.outputs[t.left];
  t.yL_right = yL.outputs[t.right];
  t.y_left = y.outputs[t.left];
  t.y_right = y.outputs[t.right];
  t.changed = t.y_left != t.y0_left || t.y_right != t.yL_right;
  return t;
}

struct MutationOutcome {
  Check target = Check::kConservation;
  bool detected = false;
  /// The mutated result failed the target check and nothing else.
  bool exact = false;
  std::string witness;
};

/// Mutates known-good results so that exactly one check should fail, and
/// reports what the verifier found for each. Known-good results come from
/// `solve` (any exact discrete-valued solver over Rational).
inline std::vector<MutationOutcome> verifier_self_test(
    const std::function<BalancingResult<Rational>(const LoadedGraph&)>& solve) {
  using Q = Rational;
  std::vector<MutationOutcome> out;
  auto judge = [&](Check target, const LoadedGraph& g, const BalancingResult<Q>& r) {
    const auto before = check_feasible(g, solve(g));
    ensure(before.pass(), "self-test baseline does not verify");
    const auto report = check_feasible(g, r);
    MutationOutcome m{target, false, false, ""};
    const auto& v = report.verdict(target);
    m.detected = !v.pass && !v.witnesses.empty();
    m.exact = report.failed() == std::vector<Check>{target};
    if (!v.witnesses.empty()) m.witness = v.witnesses.front().describe(g);
    out.push_back(m);
  };
  auto with_move = [](const LoadedGraph& g, BalancingResult<Q> r, NodeId from, NodeId to, const Q& amount) {
    const auto e = *g.edge_between(from, to);
    const Q signed_amount = from < to ? amount : Q(-amount);
    r.flow.send_on(e, true, signed_amount);
    r.outputs[from] -= amount;
    r.outputs[to] += amount;
    r.rounds = std::max<std::size_t>(r.rounds, 1);
    r.transcript.record(1, e, signed_amount);
    return r;
  };

  // Conservation: extra flow on one edge that the outputs do not reflect.
  {
    const auto g = build_cycle(8).with_loads(std::vector<int>(8, 2), 4);
    auto r = solve(g);
    r.flow.send_on(0, true, Q(1));
    r.rounds = std::max<std::size_t>(r.rounds, 1);
    r.transcript.record(1, 0, Q(1));
    judge(Check::kConservation, g, r);
  }
  // Happiness: report the unhappy input unchanged.
  {
    const auto g = build_path(6).with_loads({4, 0, 0, 0, 0, 0}, 4);
    BalancingResult<Q> r;
    r.discrete = true;
    r.flow = Flow<Q>(g.edge_count());
    for (NodeId v = 0; v < g.node_count(); ++v) r.outputs.push_back(Q(g.load(v)));
    judge(Check::kHappiness, g, r);
  }
  // Range: push a unit out of an empty node, leaving it negative.
  {
    const auto g = build_path(5).with_loads({0, 0, 0, 0, 0}, 2);
    auto r = solve(g);
    r = with_move(g, r, 2, 3, Q(1));
    r = with_move(g, r, 1, 2, Q(1));
    judge(Check::kRange, g, r);
  }
  // Integrality: half a unit across an edge of a flat discrete result.
  {
    const auto g = build_cycle(8).with_loads(std::vector<int>(8, 2), 4);
    auto r = solve(g);
    r = with_move(g, r, 0, 1, Q(1, 2));
    judge(Check::kIntegrality, g, r);
  }
  // Transcript: a recorded movement that the flow does not contain.
  {
    const auto g = random_load(build_path(10), 4, 3);
    auto r = solve(g);
    r.rounds = std::max<std::size_t>(r.rounds, 1);
    r.transcript.record(1, 0, Q(2));
    judge(Check::kTranscript, g, r);
  }
  return out;
}

}  // namespace locbal

#endif  // LOCBAL_VERIFIER_HPP_
