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

#ifndef LOCBAL_GENERAL_DISCRETE_HPP_
#define LOCBAL_GENERAL_DISCRETE_HPP_

// Discrete balancing on bounded-degree graphs by cone freezing.
//
// The cone of slot (v, i) is every slot (u, j) != (v, i) with
// i - j >= dist(v, u). A token whose cone is full is stable and frozen.
// Levels h = L..1 are processed top-down: unfrozen tokens at height h are
// matched to empty slots in their cones (a maximal matching in the bipartite
// graph F_h), matched tokens move there and the rest freeze, then columns
// collapse. Frozen slots always form a bottom prefix of their column.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/graph.hpp"

namespace locbal {

struct Slot {
  NodeId node = 0;
  int level = 1;

  friend bool operator==(const Slot&, const Slot&) = default;
  /// Proposal order: by level, then node id.
  friend auto operator<=>(const Slot& a, const Slot& b) {
    if (a.level != b.level) return a.level <=> b.level;
    return a.node <=> b.node;
  }
};

/// Worst-case size of a radius-r ball in a graph of maximum degree delta,
/// saturating at the numeric limit.
inline std::size_t ball_size_bound(int delta, std::size_t radius) {
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t total = 1, layer = static_cast<std::size_t>(std::max(delta, 0));
  for (std::size_t k = 1; k <= radius && layer > 0; ++k) {
    if (total > kMax - layer) return kMax;
    total += layer;
    const auto branching = static_cast<std::size_t>(std::max(delta - 1, 0));
    if (branching != 0 && layer > kMax / branching) return kMax;
    layer *= branching;
  }
  return total;
}

/// BFS balls of a fixed radius around every node, with parents for routing.
class BallIndex {
 public:
  struct Entry {
    NodeId node;
    std::size_t distance;
  };

  BallIndex() = default;
  BallIndex(const LoadedGraph& graph, std::size_t radius) : radius_(radius) {
    const std::size_t n = graph.node_count();
    balls_.resize(n);
    parents_.resize(n);
    std::vector<std::size_t> dist(n, kUnreachable);
    std::vector<NodeId> parent(n, 0);
    for (NodeId v = 0; v < n; ++v) {
      auto& ball = balls_[v];
      ball.push_back({v, 0});
      dist[v] = 0;
      parent[v] = v;
      for (std::size_t head = 0; head < ball.size(); ++head) {
        const auto [u, d] = ball[head];
        if (d == radius) continue;
        for (const PortLink& link : graph.ports(u)) {
          if (dist[link.neighbor] != kUnreachable) continue;
          dist[link.neighbor] = d + 1;
          parent[link.neighbor] = u;
          ball.push_back({link.neighbor, d + 1});
        }
      }
      auto& par = parents_[v];
      for (const auto& e : ball) par.emplace_back(e.node, parent[e.node]);
      std::sort(par.begin(), par.end());
      for (const auto& e : ball) dist[e.node] = kUnreachable;
    }
  }

  std::size_t radius() const { return radius_; }
  /// Nodes within the radius, in BFS order (center first).
  const std::vector<Entry>& ball(NodeId v) const { return balls_.at(v); }

  std::size_t max_ball_size() const {
    std::size_t best = 0;
    for (const auto& b : balls_) best = std::max(best, b.size());
    return best;
  }

  /// Shortest route from v to u (both inclusive); u must lie in v's ball.
  std::vector<NodeId> route(NodeId v, NodeId u) const {
    const auto& par = parents_.at(v);
    std::vector<NodeId> path{u};
    NodeId cur = u;
    while (cur != v) {
      const auto it = std::lower_bound(par.begin(), par.end(), std::make_pair(cur, NodeId{0}));
      ensure(it != par.end() && it->first == cur, "route target outside the ball");
      cur = it->second;
      path.push_back(cur);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  std::size_t radius_ = 0;
  std::vector<std::vector<Entry>> balls_;
  std::vector<std::vector<std::pair<NodeId, NodeId>>> parents_;  // sorted (node, parent)
};

/// Slot occupancy with a frozen flag per slot.
class ConeSlotConfig {
 public:
  ConeSlotConfig() = default;
  ConeSlotConfig(std::size_t node_count, int levels)
      : nodes_(node_count),
        levels_(levels),
        occupied_(node_count * static_cast<std::size_t>(std::max(levels, 0)), 0),
        frozen_(occupied_.size(), 0) {
    if (levels < 0) throw Error(ErrorKind::kInvalidParameter, "negative level count");
  }

  static ConeSlotConfig from_loads(const std::vector<int>& loads, int levels) {
    ConeSlotConfig c(loads.size(), levels);
    for (NodeId v = 0; v < loads.size(); ++v) {
      if (loads[v] < 0 || loads[v] > levels) {
        throw Error(ErrorKind::kOutOfRange, "load of " + std::to_string(v) + " outside [0, L]");
      }
      for (int i = 1; i <= loads[v]; ++i) c.set_occupied(v, i, true);
    }
    return c;
  }

  std::size_t node_count() const { return nodes_; }
  int levels() const { return levels_; }

  bool occupied(NodeId v, int level) const { return occupied_[index(v, level)] != 0; }
  bool frozen(NodeId v, int level) const { return frozen_[index(v, level)] != 0; }
  void set_occupied(NodeId v, int level, bool value) { occupied_[index(v, level)] = value; }
  void set_frozen(NodeId v, int level, bool value) { frozen_[index(v, level)] = value; }

  int load(NodeId v) const {
    int k = 0;
    for (int i = 1; i <= levels_; ++i) k += occupied(v, i) ? 1 : 0;
    return k;
  }
  std::vector<int> loads() const {
    std::vector<int> out(nodes_);
    for (NodeId v = 0; v < nodes_; ++v) out[v] = load(v);
    return out;
  }
  int frozen_count(NodeId v) const {
    int k = 0;
    for (int i = 1; i <= levels_; ++i) k += frozen(v, i) ? 1 : 0;
    return k;
  }
  long long total_tokens() const {
    long long t = 0;
    for (auto c : occupied_) t += c;
    return t;
  }

  friend bool operator==(const ConeSlotConfig&, const ConeSlotConfig&) = default;

 private:
  std::size_t index(NodeId v, int level) const {
    if (v >= nodes_ || level < 1 || level > levels_) {
      throw Error(ErrorKind::kOutOfRange, "slot out of range");
    }
    return v * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(level - 1);
  }

  std::size_t nodes_ = 0;
  int levels_ = 0;
  std::vector<std::uint8_t> occupied_;
  std::vector<std::uint8_t> frozen_;
};

/// Every slot of the downward cone of (v, i), in (level, node) order.
inline std::vector<Slot> cone(const LoadedGraph& graph, NodeId v, int level, int levels) {
  if (level < 1 || level > levels) throw Error(ErrorKind::kOutOfRange, "cone level");
  std::vector<Slot> out;
  const auto dist = bfs_distances(graph, v, static_cast<std::size_t>(level - 1));
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (dist[u] == kUnreachable) continue;
    for (int j = 1; j <= level - static_cast<int>(dist[u]); ++j) {
      if (u == v && j == level) continue;
      out.push_back({u, j});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Slot> cone(const LoadedGraph& graph, NodeId v, int level) {
  return cone(graph, v, level, graph.max_load());
}

namespace detail {

template <class Visit>
void for_each_cone_slot(const BallIndex& balls, NodeId v, int level, Visit&& visit) {
  for (const auto& [u, d] : balls.ball(v)) {
    const int top = level - static_cast<int>(d);
    for (int j = 1; j <= top; ++j) {
      if (u == v && j == level) continue;
      visit(u, j);
    }
  }
}

inline bool cone_full(const ConeSlotConfig& c, const BallIndex& balls, NodeId v, int level) {
  bool full = true;
  for_each_cone_slot(balls, v, level, [&](NodeId u, int j) {
    if (full && !c.occupied(u, j)) full = false;
  });
  return full;
}

}  // namespace detail

/// Freezes every token whose cone is full, and every slot below a frozen one.
inline ConeSlotConfig initial_freeze(const LoadedGraph& graph, ConeSlotConfig config) {
  const BallIndex balls(graph, static_cast<std::size_t>(std::max(config.levels() - 1, 0)));
  for (NodeId v = 0; v < config.node_count(); ++v) {
    for (int i = config.levels(); i >= 1; --i) {
      if (config.occupied(v, i) && detail::cone_full(config, balls, v, i)) {
        for (int j = 1; j <= i; ++j) config.set_frozen(v, j, true);
        break;
      }
    }
  }
  return config;
}

/// F_h: unfrozen tokens at level h against empty slots below h.
struct BipartiteLevelGraph {
  int level = 0;
  std::vector<Slot> left;   // T, increasing node id
  std::vector<Slot> right;  // S, (level, node) order
  /// adjacency[t] lists right indices in (level, node) order.
  std::vector<std::vector<std::size_t>> adjacency;
  /// Documented cap: L times the radius-(L-1) ball size.
  std::size_t degree_bound = 0;

  std::size_t edge_count() const {
    std::size_t m = 0;
    for (const auto& a : adjacency) m += a.size();
    return m;
  }

  std::size_t max_degree() const {
    std::size_t best = 0;
    std::vector<std::size_t> right_degree(right.size(), 0);
    for (const auto& a : adjacency) {
      best = std::max(best, a.size());
      for (auto s : a) best = std::max(best, ++right_degree[s]);
    }
    return best;
  }
};

inline BipartiteLevelGraph build_level_graph(const ConeSlotConfig& config, const BallIndex& balls,
                                             int h) {
  if (h < 1 || h > config.levels()) throw Error(ErrorKind::kOutOfRange, "level out of range");
  BipartiteLevelGraph f;
  f.level = h;
  f.degree_bound = static_cast<std::size_t>(config.levels()) * balls.max_ball_size();
  const std::size_t n = config.node_count();
  std::vector<std::size_t> right_index(n * static_cast<std::size_t>(h), kUnreachable);
  for (int j = 1; j < h; ++j) {
    for (NodeId u = 0; u < n; ++u) {
      if (config.occupied(u, j)) continue;
      right_index[u * static_cast<std::size_t>(h) + static_cast<std::size_t>(j)] = f.right.size();
      f.right.push_back({u, j});
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!config.occupied(v, h) || config.frozen(v, h)) continue;
    f.left.push_back({v, h});
    auto& adj = f.adjacency.emplace_back();
    detail::for_each_cone_slot(balls, v, h, [&](NodeId u, int j) {
      if (!config.occupied(u, j)) {
        adj.push_back(right_index[u * static_cast<std::size_t>(h) + static_cast<std::size_t>(j)]);
      }
    });
    std::sort(adj.begin(), adj.end());  // right indices already follow (level, node) order
  }
  return f;
}

inline BipartiteLevelGraph build_level_graph(const LoadedGraph& graph, const ConeSlotConfig& config,
                                             int h) {
  return build_level_graph(
      config, BallIndex(graph, static_cast<std::size_t>(std::max(config.levels() - 1, 0))), h);
}

struct MatchingOutcome {
  /// match[t] = right index, or nullopt.
  std::vector<std::optional<std::size_t>> match;
  /// Proposal rounds (each one propose/answer exchange in F).
  std::size_t iterations = 0;

  std::size_t size() const {
    std::size_t k = 0;
    for (const auto& m : match) k += m ? 1 : 0;
    return k;
  }
};

/// Proposal algorithm: each round every unmatched token proposes to the next
/// slot on its list; a free slot accepts the smallest proposer, and matched
/// slots reject everyone. A token whose list runs out stays unmatched.
inline MatchingOutcome bipartite_maximal_matching(const BipartiteLevelGraph& f) {
  MatchingOutcome out;
  out.match.assign(f.left.size(), std::nullopt);
  std::vector<std::size_t> next(f.left.size(), 0);
  std::vector<bool> taken(f.right.size(), false);
  std::vector<std::optional<std::size_t>> best(f.right.size());
  for (;;) {
    std::vector<std::size_t> touched;
    for (std::size_t t = 0; t < f.left.size(); ++t) {
      if (out.match[t] || next[t] >= f.adjacency[t].size()) continue;
      const std::size_t s = f.adjacency[t][next[t]];
      if (!best[s]) touched.push_back(s);
      if (!best[s] || f.left[t].node < f.left[*best[s]].node) best[s] = t;
    }
    if (touched.empty()) break;
    ++out.iterations;
    for (std::size_t t = 0; t < f.left.size(); ++t) {
      if (out.match[t] || next[t] >= f.adjacency[t].size()) continue;
      const std::size_t s = f.adjacency[t][next[t]];
      if (!taken[s] && best[s] == t) {
        out.match[t] = s;
      } else {
        ++next[t];
      }
    }
    for (auto s : touched) {
      if (best[s] && out.match[*best[s]] == s) taken[s] = true;
      best[s].reset();
    }
  }
  return out;
}

/// True iff the matching is valid and no edge joins two unmatched vertices.
inline bool is_maximal_matching(const BipartiteLevelGraph& f, const MatchingOutcome& m) {
  std::vector<bool> used(f.right.size(), false);
  for (std::size_t t = 0; t < f.left.size(); ++t) {
    if (!m.match[t]) continue;
    const auto s = *m.match[t];
    if (s >= f.right.size() || used[s]) return false;
    if (std::find(f.adjacency[t].begin(), f.adjacency[t].end(), s) == f.adjacency[t].end()) {
      return false;
    }
    used[s] = true;
  }
  for (std::size_t t = 0; t < f.left.size(); ++t) {
    if (m.match[t]) continue;
    for (auto s : f.adjacency[t]) {
      if (!used[s]) return false;
    }
  }
  return true;
}

/// Drops every column's tokens to the bottom. Frozen slots must already be
/// a filled bottom prefix; they stay frozen in place.
inline ConeSlotConfig collapse(ConeSlotConfig config) {
  for (NodeId v = 0; v < config.node_count(); ++v) {
    const int k = config.load(v);
    const int p = config.frozen_count(v);
    for (int i = 1; i <= p; ++i) {
      ensure(config.frozen(v, i) && config.occupied(v, i), "frozen slots are not a full prefix");
    }
    for (int i = 1; i <= config.levels(); ++i) config.set_occupied(v, i, i <= k);
  }
  return config;
}

struct DiscreteOptions {
  /// Reject runs whose radius-(L-1) ball bound exceeds this many nodes.
  std::size_t max_ball_nodes = 200000;
  bool record_transcript = true;
};

struct DiscreteLevelStats {
  int level = 0;
  std::size_t tokens = 0;
  std::size_t slots = 0;
  std::size_t edges = 0;
  std::size_t max_degree = 0;
  std::size_t matched = 0;
  std::size_t iterations = 0;
};

struct DiscreteStats {
  std::vector<DiscreteLevelStats> levels;
  std::size_t ball_bound = 0;
  ConeSlotConfig final_config;
};

/// Rounds charged for one level: L to build F_h, 2L per proposal exchange
/// (F_h neighbours are up to L - 1 hops apart), and L to move and freeze.
inline std::size_t discrete_level_rounds(int levels, std::size_t iterations) {
  const auto l = static_cast<std::size_t>(levels);
  return l + 2 * l * iterations + l;
}

inline BalancingResult<long long> run_discrete(const LoadedGraph& graph,
                                               const DiscreteOptions& options = {},
                                               DiscreteStats* stats = nullptr) {
  const int levels = graph.max_load();
  const std::size_t n = graph.node_count();
  const auto radius = static_cast<std::size_t>(std::max(levels - 1, 0));
  const std::size_t bound = std::min(ball_size_bound(graph.max_degree(), radius), n);
  if (bound > options.max_ball_nodes) {
    throw Error(ErrorKind::kBudgetExceeded,
                "ball bound " + std::to_string(bound) + " exceeds the budget of " +
                    std::to_string(options.max_ball_nodes) + " nodes");
  }
  const BallIndex balls(graph, radius);

  BalancingResult<long long> result;
  result.discrete = true;
  result.flow = Flow<long long>(graph.edge_count());
  ConeSlotConfig config = initial_freeze(graph, ConeSlotConfig::from_loads(graph.loads(), levels));
  result.rounds = static_cast<std::size_t>(levels);  // gather the radius-(L-1) ball

  for (int h = levels; h >= 1; --h) {
    const BipartiteLevelGraph f = build_level_graph(config, balls, h);
    const MatchingOutcome m = bipartite_maximal_matching(f);
    ensure(is_maximal_matching(f, m), "proposal matching is not maximal");
    std::vector<int> frozen_before(n);
    for (NodeId v = 0; v < n; ++v) frozen_before[v] = config.frozen_count(v);

    const std::size_t round = result.rounds + discrete_level_rounds(levels, m.iterations);
    result.rounds = round;
    for (std::size_t t = 0; t < f.left.size(); ++t) {
      if (!m.match[t]) continue;
      const Slot from = f.left[t], to = f.right[*m.match[t]];
      ensure(to.level < h, "matched token does not descend");
      config.set_occupied(from.node, from.level, false);
      config.set_occupied(to.node, to.level, true);
      route_amount(graph, balls.route(from.node, to.node), 1LL, result.flow,
                   options.record_transcript ? &result.transcript : nullptr, round);
    }
    for (std::size_t t = 0; t < f.left.size(); ++t) {
      if (m.match[t]) continue;
      const Slot tok = f.left[t];
      ensure(detail::cone_full(config, balls, tok.node, h), "unmatched token with a free cone slot");
      for (int j = 1; j <= h; ++j) config.set_frozen(tok.node, j, true);
    }
    config = collapse(config);
    for (NodeId v = 0; v < n; ++v) {
      ensure(config.frozen_count(v) >= frozen_before[v], "a frozen token moved");
      for (int i = h; i <= levels; ++i) {
        ensure(!config.occupied(v, i) || config.frozen(v, i), "unfrozen token left at a handled level");
      }
    }
    if (stats) {
      stats->levels.push_back({h, f.left.size(), f.right.size(), f.edge_count(), f.max_degree(),
                               m.size(), m.iterations});
    }
  }

  result.outputs.resize(n);
  for (NodeId v = 0; v < n; ++v) result.outputs[v] = config.load(v);
  for (const auto& [a, b] : graph.edges()) {
    ensure(std::abs(result.outputs[a] - result.outputs[b]) <= 1, "stable configuration is unhappy");
  }
  if (options.record_transcript) result.transcript.ensure_rounds(result.rounds);
  if (stats) {
    stats->ball_bound = bound;
    stats->final_config = config;
  }
  return result;
}

}  // namespace locbal

#endif  // LOCBAL_GENERAL_DISCRETE_HPP_
