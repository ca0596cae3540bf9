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

#ifndef LOCBAL_BASELINES_HPP_
#define LOCBAL_BASELINES_HPP_

// Reference algorithms and lower-bound gadgets: the centralised oracle,
// moving average on 2-regular graphs, match-and-balance, oblivious kernels,
// and work accounting over transcripts.

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/graph.hpp"
#include "locbal/runtime.hpp"

namespace locbal {

/// Moves one unit across the unhappy edge of lowest id until every edge is
/// happy. Each move is its own step in the transcript.
inline BalancingResult<long long> centralized_oracle(const LoadedGraph& graph) {
  const auto& edges = graph.edges();
  std::vector<long long> y(graph.loads().begin(), graph.loads().end());
  auto unhappy = [&](EdgeId e) {
    const auto& [a, b] = edges[e];
    return y[a] - y[b] >= 2 || y[b] - y[a] >= 2;
  };
  std::vector<std::vector<EdgeId>> incident(graph.node_count());
  std::set<EdgeId> pending;
  for (EdgeId e = 0; e < edges.size(); ++e) {
    incident[edges[e].first].push_back(e);
    incident[edges[e].second].push_back(e);
    if (unhappy(e)) pending.insert(e);
  }
  BalancingResult<long long> result;
  result.discrete = true;
  result.flow = Flow<long long>(edges.size());
  while (!pending.empty()) {
    const EdgeId e = *pending.begin();
    const auto& [a, b] = edges[e];
    const bool down = y[a] > y[b];  // low id to high id
    const long long sign = down ? 1 : -1;
    y[a] -= sign;
    y[b] += sign;
    result.flow.send_on(e, true, sign);
    ++result.rounds;
    result.transcript.record(result.rounds, e, sign);
    long long next = 0;
    for (long long v : {y[a], y[b]}) next += v * v;
    const long long before = (y[a] + sign) * (y[a] + sign) + (y[b] - sign) * (y[b] - sign);
    ensure(before - next >= 2, "oracle potential did not drop");
    for (NodeId w : {a, b}) {
      for (EdgeId f : incident[w]) {
        if (unhappy(f)) {
          pending.insert(f);
        } else {
          pending.erase(f);
        }
      }
    }
  }
  result.outputs = std::move(y);
  return result;
}

/// Moving average with window radius L (L = graph.max_load()). On a cycle of
/// m nodes, every node gives 1/(2L+1) of its load to each of the 2L+1 walk
/// offsets -L..L (offsets may wrap). A path of n nodes is mirrored onto a
/// cycle of 2n nodes; by symmetry nothing crosses the two mirror edges.
/// Charged L rounds: the flow on an edge depends on the loads within L hops.
inline BalancingResult<Rational> moving_average(const LoadedGraph& graph, int window = -1) {
  const int L = window < 0 ? graph.max_load() : window;
  const std::size_t n = graph.node_count();
  const bool cycle = graph.topology() == Topology::kCycle;
  if (!cycle && graph.topology() != Topology::kPath) {
    throw Error(ErrorKind::kUnsupportedTopology, "moving average needs a path or cycle");
  }
  // Position order along the cycle or path.
  std::vector<NodeId> order;
  if (n > 0) {
    NodeId start = 0;
    if (!cycle) {
      for (NodeId v = 0; v < n; ++v) {
        if (graph.degree(v) <= 1) {
          start = v;
          break;
        }
      }
    }
    std::vector<bool> seen(n, false);
    NodeId cur = start;
    for (std::size_t k = 0; k < n; ++k) {
      order.push_back(cur);
      seen[cur] = true;
      for (const auto& link : graph.ports(cur)) {
        if (!seen[link.neighbor]) {
          cur = link.neighbor;
          break;
        }
      }
    }
  }
  std::vector<long long> x;
  for (NodeId v : order) x.push_back(graph.load(v));
  if (!cycle) {
    for (std::size_t i = n; i-- > 0;) x.push_back(x[i]);
  }
  const std::size_t m = x.size();
  const Rational share(1, 2 * L + 1);
  const auto mm = static_cast<long long>(m);
  auto at = [&](long long i) { return x[static_cast<std::size_t>(((i % mm) + mm) % mm)]; };
  // forward[i]: flow from position i to i + 1 on the (mirrored) cycle.
  std::vector<Rational> forward(m, Rational(0));
  for (std::size_t i = 0; i < m; ++i) {
    long long out = 0, back = 0;
    const auto p = static_cast<long long>(i);
    for (int a = 0; a < L; ++a) out += at(p - a) * (L - a);
    for (int b = 1; b <= L; ++b) back += at(p + b) * (L - b + 1);
    forward[i] = Rational(out - back) * share;
  }
  BalancingResult<Rational> result;
  result.discrete = false;
  result.flow = Flow<Rational>(graph.edge_count());
  result.outputs.assign(n, Rational(0));
  result.rounds = n > 1 ? static_cast<std::size_t>(L) : 0;
  const std::size_t limit = cycle ? n : (n == 0 ? 0 : n - 1);
  for (std::size_t i = 0; i < limit; ++i) {
    const NodeId a = order[i], b = order[(i + 1) % n];
    if (a == b) continue;
    result.flow.send(graph, a, b, forward[i]);
  }
  if (!cycle && n > 0) {
    ensure(forward[n - 1] == Rational(0) && forward[m - 1] == Rational(0), "mirror edges carry flow");
  }
  const auto in = result.flow.inflow(graph);
  for (NodeId v = 0; v < n; ++v) result.outputs[v] = Rational(graph.load(v)) + in[v];
  if (result.rounds > 0) {
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      const Rational& amount = result.flow.stored(e);
      if (amount != Rational(0)) result.transcript.record(result.rounds, e, amount);
    }
  }
  result.transcript.ensure_rounds(result.rounds);
  return result;
}

enum class MatcherPolicy {
  kEdgeId,      // greedy maximal matching of unhappy edges by edge id
  kLargestGap,  // greedy by decreasing load difference, ties by edge id
};

inline const char* to_string(MatcherPolicy p) {
  return p == MatcherPolicy::kEdgeId ? "edge-id" : "largest-gap";
}

struct MatchAndBalanceOptions {
  MatcherPolicy policy = MatcherPolicy::kEdgeId;
  std::size_t max_rounds = 1000000;
  /// Called after every round with the round number and the loads.
  std::function<void(std::size_t, const std::vector<long long>&)> observer{};
};

struct MatchAndBalanceRun {
  BalancingResult<long long> result;
  /// Units moved per round (each unit crosses one edge).
  std::vector<long long> round_work;
};

/// Each round picks a matching of unhappy edges and moves
/// floor((y(u) - y(v)) / 2) units across each matched edge. Stops when all
/// edges are happy; throws BudgetExceeded (with the partial result) when the
/// round budget runs out first.
inline MatchAndBalanceRun match_and_balance(const LoadedGraph& graph,
                                            const MatchAndBalanceOptions& options = {}) {
  const auto& edges = graph.edges();
  MatchAndBalanceRun run;
  auto& result = run.result;
  result.discrete = true;
  result.flow = Flow<long long>(edges.size());
  result.outputs.assign(graph.loads().begin(), graph.loads().end());
  auto& y = result.outputs;
  std::vector<EdgeId> candidates;
  std::vector<bool> busy(graph.node_count(), false);
  for (;;) {
    candidates.clear();
    for (EdgeId e = 0; e < edges.size(); ++e) {
      if (std::abs(y[edges[e].first] - y[edges[e].second]) >= 2) candidates.push_back(e);
    }
    if (candidates.empty()) break;
    if (result.rounds >= options.max_rounds) {
      result.completed = false;
      throw BudgetExceeded<long long>(result, "match-and-balance ran out of rounds");
    }
    if (options.policy == MatcherPolicy::kLargestGap) {
      std::stable_sort(candidates.begin(), candidates.end(), [&](EdgeId p, EdgeId q) {
        return std::abs(y[edges[p].first] - y[edges[p].second]) >
               std::abs(y[edges[q].first] - y[edges[q].second]);
      });
    }
    ++result.rounds;
    std::fill(busy.begin(), busy.end(), false);
    long long work = 0;
    std::vector<std::pair<EdgeId, long long>> moves;
    for (EdgeId e : candidates) {
      const auto& [a, b] = edges[e];
      if (busy[a] || busy[b]) continue;
      busy[a] = busy[b] = true;
      const long long amount = (y[a] - y[b]) / 2;  // signed, toward b when positive
      moves.emplace_back(e, amount);
    }
    for (const auto& [e, amount] : moves) {
      const auto& [a, b] = edges[e];
      y[a] -= amount;
      y[b] += amount;
      result.flow.send_on(e, true, amount);
      result.transcript.record(result.rounds, e, amount);
      work += std::abs(amount);
    }
    run.round_work.push_back(work);
    if (options.observer) options.observer(result.rounds, y);
  }
  result.transcript.ensure_rounds(result.rounds);
  return run;
}

struct WorkReport {
  long long total = 0;
  std::vector<long long> per_round;
  /// Units each node sent out, summed over all its movements.
  std::vector<long long> sent_by_node;
};

/// Total token-edge crossings of a transcript: sum of |amount|.
template <class Num>
Num work_accounting(const Transcript<Num>& transcript) {
  Num total(0);
  for (const auto& round : transcript.rounds_moves) {
    for (const auto& m : round) total += abs_value(m.amount);
  }
  return total;
}

inline WorkReport work_report(const LoadedGraph& graph, const Transcript<long long>& transcript) {
  WorkReport report;
  report.sent_by_node.assign(graph.node_count(), 0);
  for (const auto& round : transcript.rounds_moves) {
    long long sum = 0;
    for (const auto& m : round) {
      const auto& [a, b] = graph.edges().at(m.edge);
      report.sent_by_node[m.amount > 0 ? a : b] += std::abs(m.amount);
      sum += std::abs(m.amount);
    }
    report.per_round.push_back(sum);
    report.total += sum;
  }
  return report;
}

/// h(h+1)(h+2)/6.
inline long long tetrahedral(long long h) { return h * (h + 1) * (h + 2) / 6; }

/// Amount g(r) an oblivious algorithm ships from a full node to each node at
/// distance r (r = 1..support), on a d-regular tree with maximum load L.
struct ObliviousKernel {
  int degree = 3;
  int max_load = 0;
  std::vector<Rational> g;  // g[r - 1]
};

struct ObliviousGap {
  Rational alpha;
  Rational beta;
  Rational gap;
};

/// alpha = sum_r (d-1)^(r-1) g(r), beta = L - d alpha, gap = L - 2 alpha.
inline ObliviousGap oblivious_gap(const ObliviousKernel& k) {
  if (k.degree < 2) throw Error(ErrorKind::kInvalidParameter, "degree must be at least 2");
  ObliviousGap out;
  Rational fan(1);
  for (const Rational& g : k.g) {
    if (g < 0) throw Error(ErrorKind::kInvalidParameter, "kernel values must be nonnegative");
    out.alpha += fan * g;
    fan *= k.degree - 1;
  }
  out.beta = Rational(k.max_load) - Rational(k.degree) * out.alpha;
  if (out.beta < 0) {
    throw Error(ErrorKind::kInfeasibleKernel, "kernel ships more than L from a full node");
  }
  out.gap = Rational(k.max_load) - 2 * out.alpha;
  ensure(out.gap * k.degree >= Rational((k.degree - 2) * k.max_load), "oblivious gap below (d-2)L/d");
  return out;
}

/// Applies the kernel directly on a finite piece of the d-regular tree split
/// at edge {u, v} (u's side empty, v's side full), deep enough that every
/// node within the kernel's reach of u or v is present. Returns y(v) - y(u).
inline Rational oblivious_gap_by_tree(const ObliviousKernel& k) {
  const int d = k.degree;
  const int reach = static_cast<int>(k.g.size());
  // Explicit tree: node 0 = u, node 1 = v; each node other than u and v has
  // d - 1 children; u and v have d - 1 children besides each other.
  std::vector<int> depth{0, 0};
  std::vector<bool> full{false, true};
  std::vector<std::vector<int>> adj(2);
  adj[0].push_back(1);
  adj[1].push_back(0);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (depth[i] >= reach + 1) continue;
    for (int c = 0; c < d - 1; ++c) {
      const int child = static_cast<int>(depth.size());
      depth.push_back(depth[i] + 1);
      full.push_back(full[i]);
      adj.push_back({static_cast<int>(i)});
      adj[i].push_back(child);
    }
  }
  auto received = [&](int target) {
    std::vector<int> dist(depth.size(), -1);
    std::vector<int> queue{target};
    dist[target] = 0;
    Rational total(0);
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int w = queue[q];
      if (dist[w] > 0 && dist[w] <= reach && full[w]) total += k.g[dist[w] - 1];
      for (int z : adj[w]) {
        if (dist[z] < 0) {
          dist[z] = dist[w] + 1;
          queue.push_back(z);
        }
      }
    }
    return total;
  };
  Rational shipped(0);
  Rational fan(d);
  for (const Rational& g : k.g) {
    shipped += fan * g;
    fan *= d - 1;
  }
  const Rational y_u = received(0);
  const Rational y_v = Rational(k.max_load) - shipped + received(1);
  return y_v - y_u;
}

/// A random kernel with support s and d * alpha <= L; with `tight`, alpha is
/// exactly L / d.
inline ObliviousKernel random_kernel(int degree, int max_load, std::size_t support,
                                     SplitMix64& rng, bool tight = false) {
  ObliviousKernel k{degree, max_load, {}};
  std::vector<long long> w(support);
  long long weight = 0;
  Rational fan(1);
  for (auto& v : w) v = static_cast<long long>(rng.below(10));
  if (support > 0 && std::all_of(w.begin(), w.end(), [](long long v) { return v == 0; })) w[0] = 1;
  Rational alpha_raw(0);
  for (std::size_t r = 0; r < support; ++r) {
    alpha_raw += fan * w[r];
    weight += w[r];
    fan *= degree - 1;
  }
  if (support == 0 || weight == 0) return k;
  // Scale so alpha = fraction * L / d, fraction in (0, 1].
  const Rational fraction = tight ? Rational(1) : Rational(static_cast<long long>(rng.between(0, 16)), 16);
  const Rational scale = fraction * Rational(max_load, degree) / alpha_raw;
  for (long long v : w) k.g.push_back(scale * v);
  return k;
}

}  // namespace locbal

#endif  // LOCBAL_BASELINES_HPP_
