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

#ifndef LOCBAL_PATH_BALANCER_HPP_
#define LOCBAL_PATH_BALANCER_HPP_

// O(L)-round discrete balancing on paths and cycles.
//
// Loads are viewed as tokens in a grid of slots (v, i), v a node and
// i in 1..L a height. Along an oriented line, a token at (v, i) is
// k-stable if i = 1 or (v + k, i - 1) holds a token (or v + k does not
// exist). An l-push lets the tokens of every l-diagonal
// S(v, l) = ((v - l, 1), (v - 2l, 2), ..., (v - Ll, L)) slide to the bottom
// of the diagonal; it makes the configuration l-stable and never destroys
// k-stability obtained earlier.
//
//   A1  pushes for l = 0, 1, -1, 2, -2, 3, -3 on an infinite (or cyclic) line.
//   A2  finite lines: small paths are solved by brute force; otherwise each
//       endpoint flattens its neighbourhood and the path is extended by
//       constant dummy nodes on which A1 is simulated.
//   A3  undirected paths/cycles: every node splits into two virtual copies
//       whose ports form consistently oriented lines, A2 runs on those, the
//       copies are summed back and a one-token fix makes every edge happy.
//
// Round charging: an l-push costs 2|l|L rounds (gather, then notify), so
// one A1 pass costs T1 = 24L. See docs/ROUNDS.md.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/graph.hpp"

namespace locbal {

enum class LineKind {
  kFinitePath,    // nodes 0..width-1; outside nodes do not exist
  kCycle,         // coordinates wrap modulo width
  kInfiniteLine,  // nodes 0..width-1 stored, constant columns on both sides
};

/// Slot occupancy along an oriented line. Outside the stored window of an
/// infinite line, columns are bottom-filled up to left_fill / right_fill and
/// are read-only.
class SlotConfiguration {
 public:
  SlotConfiguration() = default;
  SlotConfiguration(LineKind kind, std::size_t width, int levels, int left_fill = 0,
                    int right_fill = 0)
      : kind_(kind),
        width_(width),
        levels_(levels),
        left_fill_(left_fill),
        right_fill_(right_fill),
        cells_(width * static_cast<std::size_t>(std::max(levels, 0)), 0) {
    if (levels < 0) throw Error(ErrorKind::kInvalidParameter, "negative level count");
    if (kind == LineKind::kCycle && width == 0) {
      throw Error(ErrorKind::kInvalidSize, "empty cycle");
    }
  }

  LineKind kind() const { return kind_; }
  std::size_t width() const { return width_; }
  int levels() const { return levels_; }
  int left_fill() const { return left_fill_; }
  int right_fill() const { return right_fill_; }

  bool exists(long long v) const {
    return kind_ != LineKind::kFinitePath || (v >= 0 && v < static_cast<long long>(width_));
  }
  bool stored(long long v) const {
    return kind_ == LineKind::kCycle || (v >= 0 && v < static_cast<long long>(width_));
  }

  bool occupied(long long v, int level) const {
    if (level < 1 || level > levels_) return false;
    if (kind_ == LineKind::kCycle) return cells_[index(wrap(v), level)] != 0;
    if (v < 0) return kind_ == LineKind::kInfiniteLine && level <= left_fill_;
    if (v >= static_cast<long long>(width_)) {
      return kind_ == LineKind::kInfiniteLine && level <= right_fill_;
    }
    return cells_[index(v, level)] != 0;
  }

  void set(long long v, int level, bool value) {
    if (level < 1 || level > levels_ || !stored(v)) {
      throw Error(ErrorKind::kOutOfRange, "slot outside the stored window");
    }
    cells_[index(kind_ == LineKind::kCycle ? wrap(v) : v, level)] = value ? 1 : 0;
  }

  int load(long long v) const {
    int count = 0;
    for (int i = 1; i <= levels_; ++i) count += occupied(v, i) ? 1 : 0;
    return count;
  }

  std::vector<int> loads() const {
    std::vector<int> out(width_);
    for (std::size_t v = 0; v < width_; ++v) out[v] = load(static_cast<long long>(v));
    return out;
  }

  long long total_tokens() const {
    long long total = 0;
    for (auto c : cells_) total += c;
    return total;
  }

  long long wrap(long long v) const {
    const auto w = static_cast<long long>(width_);
    return ((v % w) + w) % w;
  }

  friend bool operator==(const SlotConfiguration&, const SlotConfiguration&) = default;

 private:
  std::size_t index(long long v, int level) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(levels_) +
           static_cast<std::size_t>(level - 1);
  }

  LineKind kind_ = LineKind::kFinitePath;
  std::size_t width_ = 0;
  int levels_ = 0;
  int left_fill_ = 0;
  int right_fill_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Bottom-filled columns.
inline SlotConfiguration slots_from_loads(const std::vector<int>& loads, int levels,
                                          LineKind kind = LineKind::kFinitePath,
                                          int left_fill = 0, int right_fill = 0) {
  SlotConfiguration config(kind, loads.size(), levels, left_fill, right_fill);
  for (std::size_t v = 0; v < loads.size(); ++v) {
    if (loads[v] < 0 || loads[v] > levels) {
      throw Error(ErrorKind::kOutOfRange, "load of " + std::to_string(v) + " outside [0, L]");
    }
    for (int i = 1; i <= loads[v]; ++i) config.set(static_cast<long long>(v), i, true);
  }
  return config;
}

struct StabilityReport {
  bool stable = true;
  /// Offending tokens as (node, level).
  std::vector<std::pair<long long, int>> violations;
};

/// k-stability of every stored token; a missing node v + k counts as stable.
inline StabilityReport is_k_stable(const SlotConfiguration& config, int k) {
  StabilityReport report;
  for (std::size_t v = 0; v < config.width(); ++v) {
    const auto node = static_cast<long long>(v);
    for (int i = 2; i <= config.levels(); ++i) {
      if (!config.occupied(node, i)) continue;
      if (!config.exists(node + k)) continue;
      if (!config.occupied(node + k, i - 1)) {
        report.stable = false;
        report.violations.emplace_back(node, i);
      }
    }
  }
  return report;
}

inline bool is_range_stable(const SlotConfiguration& config, int lo, int hi) {
  for (int k = lo; k <= hi; ++k) {
    if (!is_k_stable(config, k).stable) return false;
  }
  return true;
}

/// Net token flow per oriented line edge (i, i + 1); for a cycle the last
/// entry is the edge (width - 1, 0). Positive means towards larger index.
class LineFlow {
 public:
  LineFlow() = default;
  LineFlow(LineKind kind, std::size_t width)
      : kind_(kind), width_(width), diff_(width + 1, 0) {}

  /// One token travelling from coordinate `from` to `to` (unwrapped on cycles).
  void move(long long from, long long to, long long count = 1) {
    if (from == to || count == 0) return;
    const long long lo = std::min(from, to), hi = std::max(from, to);
    const long long sign = to > from ? count : -count;
    if (kind_ == LineKind::kCycle) {
      const auto w = static_cast<long long>(width_);
      // Walk the edges lo..hi-1 modulo w in at most three straight segments.
      long long start = lo;
      while (start < hi) {
        const long long s = ((start % w) + w) % w;
        const long long span = std::min(hi - start, w - s);
        diff_[static_cast<std::size_t>(s)] += sign;
        diff_[static_cast<std::size_t>(s + span)] -= sign;
        start += span;
      }
    } else {
      ensure(lo >= 0 && hi < static_cast<long long>(width_), "token left the stored window");
      diff_[static_cast<std::size_t>(lo)] += sign;
      diff_[static_cast<std::size_t>(hi)] -= sign;
    }
  }

  std::size_t edge_count() const {
    if (kind_ == LineKind::kCycle) return width_;
    return width_ == 0 ? 0 : width_ - 1;
  }

  std::vector<long long> edges() const {
    std::vector<long long> out(edge_count(), 0);
    long long run = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      run += diff_[i];
      out[i] = run;
    }
    return out;
  }

  bool empty() const {
    return std::all_of(diff_.begin(), diff_.end(), [](long long d) { return d == 0; });
  }

 private:
  LineKind kind_ = LineKind::kFinitePath;
  std::size_t width_ = 0;
  std::vector<long long> diff_;
};

/// One l-push. Tokens of each l-diagonal are moved to its lowest slots
/// (lowest token to lowest slot, and so on); on a finite path the diagonal is
/// cut to the existing nodes. Movements are added to `flow` when given.
inline SlotConfiguration ell_push(const SlotConfiguration& config, int ell,
                                  LineFlow* flow = nullptr) {
  SlotConfiguration out = config;
  const int levels = config.levels();
  const auto width = static_cast<long long>(config.width());
  if (levels == 0 || width == 0) return out;

  long long owner_lo = 0, owner_hi = width - 1;
  if (config.kind() != LineKind::kCycle && ell != 0) {
    const long long reach = static_cast<long long>(levels) * ell;
    owner_lo = std::min<long long>(ell, reach);
    owner_hi = width - 1 + std::max<long long>(ell, reach);
  }

  std::vector<long long> nodes;
  std::vector<int> diag_levels;
  std::vector<std::size_t> tokens;
  for (long long owner = owner_lo; owner <= owner_hi; ++owner) {
    nodes.clear();
    diag_levels.clear();
    tokens.clear();
    for (int j = 1; j <= levels; ++j) {
      const long long node = owner - static_cast<long long>(j) * ell;
      if (!config.exists(node)) continue;
      if (config.occupied(node, j)) tokens.push_back(nodes.size());
      nodes.push_back(node);
      diag_levels.push_back(j);
    }
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const bool want = r < tokens.size();
      const bool have = config.occupied(nodes[r], diag_levels[r]);
      if (want == have) continue;
      if (!config.stored(nodes[r])) {
        throw Error(ErrorKind::kInternal, "push disturbed a constant dummy column");
      }
      out.set(nodes[r], diag_levels[r], want);
    }
    if (flow) {
      for (std::size_t r = 0; r < tokens.size(); ++r) flow->move(nodes[tokens[r]], nodes[r]);
    }
  }
  return out;
}

/// Fixed push order for A1.
inline constexpr int kPushOrder[] = {0, 1, -1, 2, -2, 3, -3};

/// Rounds charged for one l-push with `levels` slots per node.
inline std::size_t push_rounds(int ell, int levels) {
  return 2 * static_cast<std::size_t>(std::abs(ell)) * static_cast<std::size_t>(levels);
}

/// T1 = sum over the push order of 2|l|L = 24L.
inline std::size_t a1_rounds(int levels) {
  std::size_t total = 0;
  for (int ell : kPushOrder) total += push_rounds(ell, levels);
  return total;
}

/// Net line-edge flow completed at a given round.
struct LinePhase {
  std::size_t end_round = 0;
  std::vector<long long> edge_flow;
};

struct A1Outcome {
  SlotConfiguration config;
  std::vector<LinePhase> phases;
  std::size_t rounds = 0;
};

inline A1Outcome run_a1(const SlotConfiguration& start, std::size_t round_offset = 0) {
  A1Outcome outcome;
  outcome.config = start;
  const long long before = start.total_tokens();
  for (int ell : kPushOrder) {
    LineFlow flow(start.kind(), start.width());
    outcome.config = ell_push(outcome.config, ell, &flow);
    outcome.rounds += push_rounds(ell, start.levels());
    if (!flow.empty()) outcome.phases.push_back({round_offset + outcome.rounds, flow.edges()});
  }
  ensure(outcome.config.total_tokens() == before, "push lost tokens");
  return outcome;
}

enum class A2Branch { kCycle, kBruteForce, kExtended };

struct A2Outcome {
  SlotConfiguration config;  // real nodes only
  std::vector<LinePhase> phases;
  std::size_t rounds = 0;
  A2Branch branch = A2Branch::kCycle;
  int left_constant = -1;
  int right_constant = -1;
};

namespace detail {

// Central solver for short paths: repeatedly move one token across the
// lowest (node, offset) pair at distance <= 3 whose loads differ by >= 2.
// The fixed point has |y(u) - y(w)| <= 1 whenever |u - w| <= 3, which for
// bottom-filled columns is exactly [-3, 3]-stability.
inline std::vector<int> smooth_within_three(std::vector<int> y, LineFlow& flow) {
  const auto n = static_cast<long long>(y.size());
  std::set<std::pair<long long, int>> unhappy;
  auto check = [&](long long u, int delta) {
    const long long w = u + delta;
    if (u < 0 || w >= n) return;
    if (std::abs(y[u] - y[w]) >= 2) {
      unhappy.insert({u, delta});
    } else {
      unhappy.erase({u, delta});
    }
  };
  auto touch = [&](long long v) {
    for (int delta = 1; delta <= 3; ++delta) {
      check(v, delta);
      check(v - delta, delta);
    }
  };
  for (long long u = 0; u < n; ++u) {
    for (int delta = 1; delta <= 3; ++delta) check(u, delta);
  }
  while (!unhappy.empty()) {
    const auto [u, delta] = *unhappy.begin();
    const long long w = u + delta;
    const long long from = y[u] > y[w] ? u : w;
    const long long to = from == u ? w : u;
    --y[from];
    ++y[to];
    flow.move(from, to);
    touch(u);
    touch(w);
  }
  return y;
}

// Rebalances the 2T+1 nodes nearest an endpoint so that the T+1 closest hold
// one constant c and the others absorb the rest within [0, L].
inline int flatten_end(std::vector<int>& y, bool left_end, std::size_t t1, int levels,
                       LineFlow& flow) {
  const std::size_t n = y.size();
  const std::size_t window = 2 * t1 + 1;
  auto at = [&](std::size_t k) -> std::size_t { return left_end ? k : n - 1 - k; };
  long long total = 0;
  for (std::size_t k = 0; k < window; ++k) total += y[at(k)];
  const auto near = static_cast<long long>(t1 + 1), far = static_cast<long long>(t1);
  long long c = total / static_cast<long long>(window);
  const long long need = total - far * levels;  // c * near must be at least this
  if (need > 0) c = std::max(c, (need + near - 1) / near);
  ensure(c >= 0 && c <= levels && c * near <= total, "endpoint constant out of range");
  long long rest = total - c * near;
  std::vector<int> target(window);
  for (std::size_t k = 0; k <= t1; ++k) target[k] = static_cast<int>(c);
  for (std::size_t k = t1 + 1; k < window; ++k) {
    const long long remaining_nodes = static_cast<long long>(window - k);
    const long long share = (rest + remaining_nodes - 1) / remaining_nodes;
    target[k] = static_cast<int>(share);
    rest -= share;
  }
  ensure(rest == 0, "endpoint redistribution lost tokens");
  // Path flow from prefix sums, expressed in line coordinates.
  long long carried = 0;
  for (std::size_t k = 0; k + 1 < window; ++k) {
    carried += y[at(k)] - target[k];
    if (carried != 0) {
      const auto a = static_cast<long long>(at(k)), b = static_cast<long long>(at(k + 1));
      if (carried > 0) {
        flow.move(a, b, carried);
      } else {
        flow.move(b, a, -carried);
      }
    }
  }
  for (std::size_t k = 0; k < window; ++k) y[at(k)] = target[k];
  return static_cast<int>(c);
}

}  // namespace detail

/// A2 on a consistently oriented finite path or cycle (loads in 0..levels).
inline A2Outcome run_a2(const std::vector<int>& loads, bool cycle, int levels) {
  A2Outcome out;
  const std::size_t n = loads.size();
  const std::size_t t1 = a1_rounds(levels);
  if (cycle) {
    auto a1 = run_a1(slots_from_loads(loads, levels, LineKind::kCycle));
    out.config = std::move(a1.config);
    out.phases = std::move(a1.phases);
    out.rounds = a1.rounds;
    out.branch = A2Branch::kCycle;
    return out;
  }
  if (n <= 4 * t1 + 1) {
    LineFlow flow(LineKind::kFinitePath, n);
    const auto y = detail::smooth_within_three(loads, flow);
    out.config = slots_from_loads(y, levels, LineKind::kFinitePath);
    out.rounds = n - 1;  // every node gathers the whole path
    if (!flow.empty()) out.phases.push_back({out.rounds, flow.edges()});
    out.branch = A2Branch::kBruteForce;
    return out;
  }
  out.branch = A2Branch::kExtended;
  std::vector<int> y = loads;
  LineFlow flatten(LineKind::kFinitePath, n);
  out.left_constant = detail::flatten_end(y, true, t1, levels, flatten);
  out.right_constant = detail::flatten_end(y, false, t1, levels, flatten);
  const std::size_t flatten_rounds = 2 * t1;
  if (!flatten.empty()) out.phases.push_back({flatten_rounds, flatten.edges()});
  auto a1 = run_a1(slots_from_loads(y, levels, LineKind::kInfiniteLine, out.left_constant,
                                    out.right_constant),
                   flatten_rounds);
  // Dummy columns are read-only in the extended line: a push that would
  // change one throws, so no token ever crosses an endpoint.
  ensure(a1.config.load(0) == out.left_constant &&
             a1.config.load(static_cast<long long>(n - 1)) == out.right_constant,
         "A1 moved tokens at an endpoint");
  for (auto& phase : a1.phases) out.phases.push_back(std::move(phase));
  out.rounds = flatten_rounds + a1.rounds;
  out.config = slots_from_loads(a1.config.loads(), levels, LineKind::kFinitePath);
  return out;
}

// ---- undirected paths and cycles ----------------------------------------

struct VirtualNode {
  NodeId real = 0;
  int copy = 1;  // 1 or 2

  friend bool operator==(const VirtualNode&, const VirtualNode&) = default;
};

/// One consistently oriented virtual line: nodes listed left to right, i.e.
/// every node's port 2 leads to the next one.
struct VirtualComponent {
  bool cycle = false;
  std::vector<VirtualNode> nodes;
};

struct VirtualStructure {
  std::vector<VirtualComponent> components;
  /// virtual_port[v][c-1][p-1] = (neighbor virtual node, its port), if any.
  std::vector<std::array<std::array<std::optional<std::pair<VirtualNode, int>>, 2>, 2>> ports;
};

/// Splits every node v into v1, v2. Copy 1 keeps v's port numbers, copy 2
/// swaps them; an edge joining (u, a) to (v, b) links u's copy using port a
/// to the copy of v whose port for that edge is 3 - a.
inline VirtualStructure split_virtual(const LoadedGraph& graph) {
  const std::size_t n = graph.node_count();
  for (NodeId v = 0; v < n; ++v) {
    if (graph.degree(v) > 2) {
      throw Error(ErrorKind::kUnsupportedTopology, "virtual doubling needs degree <= 2");
    }
  }
  VirtualStructure vs;
  vs.ports.resize(n);
  auto virtual_port = [](int copy, int real_port) { return copy == 1 ? real_port : 3 - real_port; };
  for (NodeId u = 0; u < n; ++u) {
    for (int a = 1; a <= static_cast<int>(graph.degree(u)); ++a) {
      const PortLink& link = graph.port(u, a);
      const int b = link.remote_port;
      for (int cu = 1; cu <= 2; ++cu) {
        const int pu = virtual_port(cu, a);
        const int cv = virtual_port(1, b) == 3 - pu ? 1 : 2;
        vs.ports[u][cu - 1][pu - 1] = std::make_pair(VirtualNode{link.neighbor, cv}, 3 - pu);
      }
    }
  }
  // Consistency: port 1 always meets port 2 and links are mutual.
  for (NodeId u = 0; u < n; ++u) {
    for (int c = 1; c <= 2; ++c) {
      for (int p = 1; p <= 2; ++p) {
        const auto& link = vs.ports[u][c - 1][p - 1];
        if (!link) continue;
        ensure(link->second == 3 - p, "virtual ports are not consistent");
        const auto& back = vs.ports[link->first.real][link->first.copy - 1][link->second - 1];
        ensure(back && back->first == VirtualNode{u, c} && back->second == p,
               "virtual links are not mutual");
      }
    }
  }
  std::vector<std::array<bool, 2>> seen(n, {false, false});
  auto left_of = [&](VirtualNode x) { return vs.ports[x.real][x.copy - 1][0]; };
  auto right_of = [&](VirtualNode x) { return vs.ports[x.real][x.copy - 1][1]; };
  for (NodeId v = 0; v < n; ++v) {
    for (int c = 1; c <= 2; ++c) {
      if (seen[v][c - 1]) continue;
      // Walk left to find the start of a path, or detect a cycle.
      VirtualNode start{v, c};
      bool cycle = false;
      for (;;) {
        const auto left = left_of(start);
        if (!left) break;
        start = left->first;
        if (start == VirtualNode{v, c}) {
          cycle = true;
          break;
        }
      }
      VirtualComponent comp;
      comp.cycle = cycle;
      VirtualNode cur = start;
      for (;;) {
        seen[cur.real][cur.copy - 1] = true;
        comp.nodes.push_back(cur);
        const auto right = right_of(cur);
        if (!right || right->first == start) break;
        cur = right->first;
      }
      vs.components.push_back(std::move(comp));
    }
  }
  return vs;
}

struct FinalFixOutcome {
  std::vector<int> loads;
  /// Matched (high, low) pairs; one token moved from high to low.
  std::vector<std::pair<NodeId, NodeId>> moves;
  std::size_t rounds = 0;
};

/// Rounds charged by final_fix: two propose/answer exchanges plus the move.
inline constexpr std::size_t kFinalFixRounds = 5;

/// Makes every edge happy when loads differ by at most 2 between any two
/// nodes within distance 3. Nodes that are too low propose to their too-high
/// neighbours in port order (two proposal rounds); a too-high node accepts
/// the proposal on its lowest port; every matched pair moves one token.
inline FinalFixOutcome final_fix(const LoadedGraph& graph, const std::vector<int>& loads) {
  const std::size_t n = graph.node_count();
  if (loads.size() != n) throw Error(ErrorKind::kDimensionMismatch, "load vector size");
  for (NodeId v = 0; v < n; ++v) {
    const auto dist = bfs_distances(graph, v, 3);
    for (NodeId u = 0; u < n; ++u) {
      if (dist[u] != kUnreachable && std::abs(loads[u] - loads[v]) > 2) {
        throw Error(ErrorKind::kPreconditionViolation,
                    "loads of " + std::to_string(v) + " and " + std::to_string(u) +
                        " differ by more than 2 within distance 3");
      }
    }
  }
  FinalFixOutcome out;
  out.loads = loads;
  out.rounds = kFinalFixRounds;
  std::vector<std::vector<int>> high_ports(n);  // ports of a low node leading to high neighbours
  std::vector<bool> is_low(n, false), is_high(n, false);
  for (NodeId v = 0; v < n; ++v) {
    for (int p = 1; p <= static_cast<int>(graph.degree(v)); ++p) {
      const NodeId u = graph.port(v, p).neighbor;
      if (loads[u] >= loads[v] + 2) {
        high_ports[v].push_back(p);
        is_low[v] = true;
      }
      if (loads[v] >= loads[u] + 2) is_high[v] = true;
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    ensure(!(is_low[v] && is_high[v]), "node both too low and too high");
  }
  std::vector<std::optional<NodeId>> partner(n);
  std::vector<std::size_t> next_try(n, 0);
  for (int proposal_round = 0; proposal_round < 2; ++proposal_round) {
    // proposals[u] = list of (port at u, proposer)
    std::vector<std::vector<std::pair<int, NodeId>>> proposals(n);
    for (NodeId v = 0; v < n; ++v) {
      if (!is_low[v] || partner[v] || next_try[v] >= high_ports[v].size()) continue;
      const PortLink& link = graph.port(v, high_ports[v][next_try[v]++]);
      proposals[link.neighbor].emplace_back(link.remote_port, v);
    }
    for (NodeId u = 0; u < n; ++u) {
      if (proposals[u].empty() || partner[u]) continue;
      const auto best = *std::min_element(proposals[u].begin(), proposals[u].end());
      partner[u] = best.second;
      partner[best.second] = u;
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (is_high[v] && partner[v]) {
      --out.loads[v];
      ++out.loads[*partner[v]];
      out.moves.emplace_back(v, *partner[v]);
    }
  }
  for (const auto& [a, b] : graph.edges()) {
    ensure(std::abs(out.loads[a] - out.loads[b]) <= 1, "final fix left an unhappy edge");
  }
  return out;
}

struct A3Options {
  /// Keep per-phase movements in the transcript.
  bool record_transcript = true;
};

/// Rounds charged for learning the remote port numbers.
inline constexpr std::size_t kPortExchangeRounds = 1;

/// Discrete balancing on an undirected path or cycle in O(L) rounds.
inline BalancingResult<long long> run_a3(const LoadedGraph& graph, A3Options options = {}) {
  if (graph.topology() != Topology::kPath && graph.topology() != Topology::kCycle) {
    for (NodeId v = 0; v < graph.node_count(); ++v) {
      if (graph.degree(v) > 2) throw Error(ErrorKind::kUnsupportedTopology, "degree > 2");
    }
  }
  const std::size_t n = graph.node_count();
  const int max_load = graph.max_load();
  const int levels = std::max(1, (max_load + 1) / 2);
  BalancingResult<long long> result;
  result.discrete = true;
  result.flow = Flow<long long>(graph.edge_count());

  const VirtualStructure vs = split_virtual(graph);
  std::vector<int> summed(n, 0);
  std::size_t a2_rounds = 0;

  auto record = [&](const LoadedGraph& g, NodeId a, NodeId b, long long amount, std::size_t round) {
    if (amount == 0) return;
    const auto e = g.edge_between(a, b);
    ensure(e.has_value(), "virtual edge without a real edge");
    const long long signed_amount = a < b ? amount : -amount;
    result.flow.send_on(*e, true, signed_amount);
    if (options.record_transcript) result.transcript.record(round, *e, signed_amount);
  };

  for (const VirtualComponent& comp : vs.components) {
    std::vector<int> virtual_loads;
    for (const VirtualNode& vn : comp.nodes) {
      const int x = graph.load(vn.real);
      virtual_loads.push_back(vn.copy == 1 ? (x + 1) / 2 : x / 2);
    }
    const A2Outcome a2 = run_a2(virtual_loads, comp.cycle, levels);
    a2_rounds = std::max(a2_rounds, a2.rounds);
    const auto final_loads = a2.config.loads();
    for (std::size_t i = 0; i < comp.nodes.size(); ++i) summed[comp.nodes[i].real] += final_loads[i];
    const std::size_t m = comp.nodes.size();
    for (const LinePhase& phase : a2.phases) {
      for (std::size_t i = 0; i < phase.edge_flow.size(); ++i) {
        record(graph, comp.nodes[i].real, comp.nodes[(i + 1) % m].real, phase.edge_flow[i],
               kPortExchangeRounds + phase.end_round);
      }
    }
  }

  const FinalFixOutcome fix = final_fix(graph, summed);
  result.rounds = kPortExchangeRounds + a2_rounds + fix.rounds;
  for (const auto& [high, low] : fix.moves) record(graph, high, low, 1, result.rounds);
  if (options.record_transcript) result.transcript.ensure_rounds(result.rounds);
  result.outputs.assign(fix.loads.begin(), fix.loads.end());
  return result;
}

}  // namespace locbal

#endif  // LOCBAL_PATH_BALANCER_HPP_
