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

#ifndef LOCBAL_GRAPH_HPP_
#define LOCBAL_GRAPH_HPP_

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "locbal/common.hpp"

namespace locbal {

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

enum class Topology { kPath, kCycle, kDoubleTree, kGeneral };

inline const char* to_string(Topology t) {
  switch (t) {
    case Topology::kPath: return "path";
    case Topology::kCycle: return "cycle";
    case Topology::kDoubleTree: return "double-tree";
    case Topology::kGeneral: return "general";
  }
  return "general";
}

inline Topology topology_from_string(const std::string& s) {
  if (s == "path") return Topology::kPath;
  if (s == "cycle") return Topology::kCycle;
  if (s == "double-tree") return Topology::kDoubleTree;
  if (s == "general") return Topology::kGeneral;
  throw Error(ErrorKind::kParseError, "unknown topology '" + s + "'");
}

/// One endpoint of an edge as seen from its owner. The owner's local port
/// number is the 1-based index of this entry in its adjacency list.
struct PortLink {
  NodeId neighbor = 0;
  int remote_port = 0;
  EdgeId edge = 0;

  friend bool operator==(const PortLink&, const PortLink&) = default;
};

struct PortScheme {
  enum class Kind { kConsistent, kAdversarial };
  Kind kind = Kind::kConsistent;
  std::uint64_t seed = 0;

  static PortScheme consistent() { return {}; }
  static PortScheme adversarial(std::uint64_t seed) {
    return {Kind::kAdversarial, seed};
  }
};

/// Undirected simple graph with port numbering and an integral load vector.
/// Immutable once built; "modifiers" return new instances.
class LoadedGraph {
 public:
  /// Raw adjacency entry: (neighbor, remote port).
  using RawAdjacency = std::vector<std::vector<std::pair<NodeId, int>>>;

  LoadedGraph() = default;

  LoadedGraph(const RawAdjacency& adjacency, std::vector<int> loads,
              int max_load, int max_degree, Topology topology,
              std::optional<std::pair<NodeId, NodeId>> bridge = std::nullopt)
      : loads_(std::move(loads)),
        max_load_(max_load),
        max_degree_(max_degree),
        topology_(topology),
        bridge_(bridge) {
    const std::size_t n = adjacency.size();
    if (n == 0) throw Error(ErrorKind::kInvalidSize, "graph needs a node");
    if (loads_.size() != n) {
      throw Error(ErrorKind::kDimensionMismatch, "load vector size differs from node count");
    }
    if (max_load_ < 0) throw Error(ErrorKind::kInvalidParameter, "L must be nonnegative");
    std::set<std::pair<NodeId, NodeId>> seen;
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& [u, q] : adjacency[v]) {
        if (u >= n) throw Error(ErrorKind::kOutOfRange, "neighbor id out of range");
        if (u == v) throw Error(ErrorKind::kInvalidParameter, "self-loop at " + std::to_string(v));
        if (!seen.insert({v, u}).second) {
          throw Error(ErrorKind::kInvalidParameter, "parallel edge " + std::to_string(v) +
                                                        "-" + std::to_string(u));
        }
        if (v < u) edges_.emplace_back(v, u);
      }
    }
    std::sort(edges_.begin(), edges_.end());
    adjacency_.resize(n);
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& [u, q] : adjacency[v]) {
        const auto key = std::minmax(u, v);
        const auto it = std::lower_bound(edges_.begin(), edges_.end(),
                                         std::pair<NodeId, NodeId>(key.first, key.second));
        if (it == edges_.end() || *it != std::pair<NodeId, NodeId>(key.first, key.second)) {
          throw Error(ErrorKind::kInvalidParameter, "asymmetric adjacency");
        }
        adjacency_[v].push_back({u, q, static_cast<EdgeId>(it - edges_.begin())});
      }
    }
    const auto problems = validate();
    if (!problems.empty()) throw Error(ErrorKind::kInvalidParameter, problems.front());
  }

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t degree(NodeId v) const { return adjacency_.at(v).size(); }

  /// Port numbers are 1-based.
  const PortLink& port(NodeId v, int p) const { return adjacency_.at(v).at(p - 1); }
  const std::vector<PortLink>& ports(NodeId v) const { return adjacency_.at(v); }

  /// Edges are stored as (lower id, higher id) and sorted; the index is the
  /// edge id.
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

  std::optional<EdgeId> edge_between(NodeId u, NodeId v) const {
    const auto key = std::minmax(u, v);
    const std::pair<NodeId, NodeId> target(key.first, key.second);
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), target);
    if (it == edges_.end() || *it != target) return std::nullopt;
    return static_cast<EdgeId>(it - edges_.begin());
  }

  /// Local port at u through which v is reached.
  std::optional<int> port_towards(NodeId u, NodeId v) const {
    const auto& ps = adjacency_.at(u);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i].neighbor == v) return static_cast<int>(i + 1);
    }
    return std::nullopt;
  }

  const std::vector<int>& loads() const { return loads_; }
  int load(NodeId v) const { return loads_.at(v); }
  int max_load() const { return max_load_; }
  int max_degree() const { return max_degree_; }
  Topology topology() const { return topology_; }
  const std::optional<std::pair<NodeId, NodeId>>& bridge() const { return bridge_; }

  long long total_load() const {
    long long s = 0;
    for (int x : loads_) s += x;
    return s;
  }

  LoadedGraph with_loads(std::vector<int> loads, std::optional<int> max_load = std::nullopt) const {
    LoadedGraph g = *this;
    if (loads.size() != node_count()) {
      throw Error(ErrorKind::kDimensionMismatch, "load vector size differs from node count");
    }
    g.loads_ = std::move(loads);
    if (max_load) g.max_load_ = *max_load;
    const auto problems = g.validate();
    if (!problems.empty()) throw Error(ErrorKind::kOutOfRange, problems.front());
    return g;
  }

  /// Checks every structural invariant and returns one message per problem.
  std::vector<std::string> validate() const {
    std::vector<std::string> problems;
    const std::size_t n = node_count();
    for (NodeId v = 0; v < n; ++v) {
      const auto& ps = adjacency_[v];
      if (static_cast<int>(ps.size()) > max_degree_) {
        problems.push_back("degree of " + std::to_string(v) + " exceeds delta");
      }
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const PortLink& link = ps[i];
        const int p = static_cast<int>(i + 1);
        const NodeId u = link.neighbor;
        if (u >= n || link.remote_port < 1 || link.remote_port > static_cast<int>(adjacency_[u].size())) {
          problems.push_back("dangling port " + std::to_string(v) + ":" + std::to_string(p));
          continue;
        }
        const PortLink& back = adjacency_[u][link.remote_port - 1];
        if (back.neighbor != v || back.remote_port != p || back.edge != link.edge) {
          problems.push_back("asymmetric port " + std::to_string(v) + ":" + std::to_string(p));
        }
      }
    }
    for (NodeId v = 0; v < n; ++v) {
      if (loads_[v] < 0 || loads_[v] > max_load_) {
        problems.push_back("load of " + std::to_string(v) + " outside [0, L]");
      }
    }
    return problems;
  }

  friend bool operator==(const LoadedGraph&, const LoadedGraph&) = default;

 private:
  std::vector<std::vector<PortLink>> adjacency_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<int> loads_;
  int max_load_ = 0;
  int max_degree_ = 0;
  Topology topology_ = Topology::kGeneral;
  std::optional<std::pair<NodeId, NodeId>> bridge_;
};

namespace detail {

// Ports are assigned in the order edges are listed; an adversarial scheme
// then permutes every node's ports uniformly.
inline LoadedGraph::RawAdjacency assign_ports(
    std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
    const PortScheme& scheme) {
  std::vector<std::vector<NodeId>> order(n);
  for (const auto& [u, v] : edge_list) {
    order[u].push_back(v);
    order[v].push_back(u);
  }
  if (scheme.kind == PortScheme::Kind::kAdversarial) {
    SplitMix64 rng(scheme.seed);
    for (auto& list : order) {
      SplitMix64 local = rng.split();
      shuffle(list, local);
    }
  }
  std::vector<std::map<NodeId, int>> port_of(n);
  for (NodeId v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < order[v].size(); ++i) {
      port_of[v][order[v][i]] = static_cast<int>(i + 1);
    }
  }
  LoadedGraph::RawAdjacency adjacency(n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : order[v]) adjacency[v].emplace_back(u, port_of[u].at(v));
  }
  return adjacency;
}

}  // namespace detail

/// Path 0-1-...-(n-1). Under the consistent scheme port 1 points left and
/// port 2 points right; endpoints have a single port 1.
inline LoadedGraph build_path(std::size_t n, PortScheme scheme = PortScheme::consistent(),
                              int max_load = 0) {
  if (n == 0) throw Error(ErrorKind::kInvalidSize, "path needs n >= 1");
  std::vector<std::pair<NodeId, NodeId>> edge_list;
  for (NodeId v = 0; v + 1 < n; ++v) edge_list.emplace_back(v, v + 1);
  return LoadedGraph(detail::assign_ports(n, edge_list, scheme), std::vector<int>(n, 0),
                     max_load, 2, Topology::kPath);
}

/// Cycle on n >= 3 nodes; consistent ports: 1 = (v-1) mod n, 2 = (v+1) mod n.
inline LoadedGraph build_cycle(std::size_t n, PortScheme scheme = PortScheme::consistent(),
                               int max_load = 0) {
  if (n < 3) throw Error(ErrorKind::kInvalidSize, "cycle needs n >= 3");
  std::vector<std::vector<NodeId>> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = {(v + n - 1) % n, (v + 1) % n};
  if (scheme.kind == PortScheme::Kind::kAdversarial) {
    SplitMix64 rng(scheme.seed);
    for (auto& list : order) {
      SplitMix64 local = rng.split();
      shuffle(list, local);
    }
  }
  LoadedGraph::RawAdjacency adjacency(n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : order[v]) {
      const int q = order[u][0] == v ? 1 : 2;
      adjacency[v].emplace_back(u, q);
    }
  }
  return LoadedGraph(adjacency, std::vector<int>(n, 0), max_load, 2, Topology::kCycle);
}

/// Number of nodes in one side of build_double_tree.
inline std::size_t double_tree_side_size(int d, int max_load) {
  std::size_t total = 0, level = 1;
  for (int k = 0; k <= max_load / 4; ++k) {
    total += level;
    level *= static_cast<std::size_t>(d - 1);
  }
  return total;
}

/// Two complete (d-1)-ary trees of depth L/4 rooted at u = 0 and
/// v = side_size, joined by the bridge {u, v}. The u side is empty and the
/// v side is full. Nodes of each side are numbered in BFS order.
inline LoadedGraph build_double_tree(int d, int max_load) {
  if (d < 3) throw Error(ErrorKind::kInvalidParameter, "double tree needs d >= 3");
  if (max_load < 4 || max_load % 4 != 0) {
    throw Error(ErrorKind::kInvalidParameter, "double tree needs L >= 4 divisible by 4");
  }
  const std::size_t side = double_tree_side_size(d, max_load);
  std::vector<std::pair<NodeId, NodeId>> edge_list;
  edge_list.emplace_back(0, side);
  for (std::size_t offset : {std::size_t{0}, side}) {
    // BFS numbering: children of local node i are (d-1)*i + 1 ... (d-1)*i + d-1.
    for (std::size_t i = 0; i < side; ++i) {
      for (int c = 1; c <= d - 1; ++c) {
        const std::size_t child = static_cast<std::size_t>(d - 1) * i + static_cast<std::size_t>(c);
        if (child < side) edge_list.emplace_back(offset + i, offset + child);
      }
    }
  }
  std::vector<int> loads(2 * side, 0);
  for (std::size_t i = side; i < 2 * side; ++i) loads[i] = max_load;
  return LoadedGraph(detail::assign_ports(2 * side, edge_list, PortScheme::consistent()),
                     std::move(loads), max_load, d, Topology::kDoubleTree,
                     std::pair<NodeId, NodeId>(0, side));
}

/// Random simple graph with maximum degree `max_degree`: a random spanning
/// tree respecting the degree cap (so the graph is connected when
/// max_degree >= 2), then `extra_edges` random additional edges attempted.
inline LoadedGraph build_random_graph(std::size_t n, int max_degree, std::uint64_t seed,
                                      std::size_t extra_edges, int max_load = 0) {
  if (n == 0) throw Error(ErrorKind::kInvalidSize, "graph needs n >= 1");
  if (max_degree < 1 || (max_degree < 2 && n > 2)) {
    throw Error(ErrorKind::kInvalidParameter, "delta too small for a connected graph");
  }
  SplitMix64 rng(seed);
  std::vector<int> deg(n, 0);
  std::set<std::pair<NodeId, NodeId>> present;
  std::vector<std::pair<NodeId, NodeId>> edge_list;
  for (NodeId v = 1; v < n; ++v) {
    std::vector<NodeId> candidates;
    for (NodeId u = 0; u < v; ++u) {
      if (deg[u] < max_degree) candidates.push_back(u);
    }
    ensure(!candidates.empty(), "no attachment point for spanning tree");
    const NodeId u = candidates[rng.below(candidates.size())];
    edge_list.emplace_back(u, v);
    present.insert({u, v});
    ++deg[u];
    ++deg[v];
  }
  for (std::size_t attempt = 0; attempt < extra_edges && n >= 2; ++attempt) {
    NodeId a = rng.below(n), b = rng.below(n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (deg[a] >= max_degree || deg[b] >= max_degree || present.count({a, b})) continue;
    edge_list.emplace_back(a, b);
    present.insert({a, b});
    ++deg[a];
    ++deg[b];
  }
  return LoadedGraph(detail::assign_ports(n, edge_list, PortScheme::adversarial(rng.next())),
                     std::vector<int>(n, 0), max_load, max_degree, Topology::kGeneral);
}

enum class StepOrientation {
  kLowThenHigh,  // x(i) = 0 for i <= m, L otherwise
  kHighThenLow,  // x(i) = L for i <= m, 0 otherwise
};

inline LoadedGraph step_load(const LoadedGraph& graph, std::size_t m, int max_load,
                             StepOrientation orientation = StepOrientation::kLowThenHigh) {
  if (graph.topology() != Topology::kPath && graph.topology() != Topology::kCycle) {
    throw Error(ErrorKind::kUnsupportedTopology, "step load needs a path or cycle");
  }
  if (m >= graph.node_count()) throw Error(ErrorKind::kOutOfRange, "split index out of range");
  std::vector<int> loads(graph.node_count());
  for (NodeId i = 0; i < loads.size(); ++i) {
    const bool low_side = i <= m;
    const bool high = orientation == StepOrientation::kLowThenHigh ? !low_side : low_side;
    loads[i] = high ? max_load : 0;
  }
  return graph.with_loads(std::move(loads), max_load);
}

/// Loads drawn uniformly from {0, ..., L} with SplitMix64(seed).
inline LoadedGraph random_load(const LoadedGraph& graph, int max_load, std::uint64_t seed) {
  if (max_load < 0) throw Error(ErrorKind::kInvalidParameter, "L must be nonnegative");
  SplitMix64 rng(seed);
  std::vector<int> loads(graph.node_count());
  for (int& x : loads) x = static_cast<int>(rng.between(0, max_load));
  return graph.with_loads(std::move(loads), max_load);
}

/// BFS hop distances from `source`, exploring at most `radius` hops;
/// unreached nodes get kUnreachable.
inline std::vector<std::size_t> bfs_distances(const LoadedGraph& graph, NodeId source,
                                              std::size_t radius = kUnreachable) {
  std::vector<std::size_t> dist(graph.node_count(), kUnreachable);
  std::queue<NodeId> queue;
  dist.at(source) = 0;
  queue.push(source);
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop();
    if (dist[v] == radius) continue;
    for (const PortLink& link : graph.ports(v)) {
      if (dist[link.neighbor] == kUnreachable) {
        dist[link.neighbor] = dist[v] + 1;
        queue.push(link.neighbor);
      }
    }
  }
  return dist;
}

inline std::optional<std::size_t> distance(const LoadedGraph& graph, NodeId u, NodeId v) {
  if (u >= graph.node_count() || v >= graph.node_count()) {
    throw Error(ErrorKind::kOutOfRange, "node id out of range");
  }
  const std::size_t d = bfs_distances(graph, u)[v];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

/// Deterministic shortest path u -> v (lowest-port BFS tree), as node list.
inline std::vector<NodeId> shortest_path(const LoadedGraph& graph, NodeId u, NodeId v) {
  std::vector<NodeId> parent(graph.node_count(), kUnreachable);
  std::queue<NodeId> queue;
  parent[v] = v;
  queue.push(v);
  while (!queue.empty() && parent[u] == kUnreachable) {
    const NodeId w = queue.front();
    queue.pop();
    for (const PortLink& link : graph.ports(w)) {
      if (parent[link.neighbor] == kUnreachable) {
        parent[link.neighbor] = w;
        queue.push(link.neighbor);
      }
    }
  }
  if (parent[u] == kUnreachable) throw Error(ErrorKind::kInvalidParameter, "nodes disconnected");
  std::vector<NodeId> route{u};
  while (route.back() != v) route.push_back(parent[route.back()]);
  return route;
}

// ---- instance file format ------------------------------------------------
//
//   locbal-instance 1
//   n <n> L <L> delta <delta> topology <path|cycle|double-tree|general>
//   loads <x_0> ... <x_{n-1}>
//   adj <v> <deg> <neighbor>:<remote port> ...     (one line per node, port order)
//   bridge <u> <v>                                 (double-tree only)
//   end

inline void write_instance(std::ostream& out, const LoadedGraph& g) {
  out << "locbal-instance 1\n";
  out << "n " << g.node_count() << " L " << g.max_load() << " delta " << g.max_degree()
      << " topology " << to_string(g.topology()) << "\n";
  out << "loads";
  for (int x : g.loads()) out << ' ' << x;
  out << "\n";
  for (NodeId v = 0; v < g.node_count(); ++v) {
    out << "adj " << v << ' ' << g.degree(v);
    for (const PortLink& link : g.ports(v)) out << ' ' << link.neighbor << ':' << link.remote_port;
    out << "\n";
  }
  if (g.bridge()) out << "bridge " << g.bridge()->first << ' ' << g.bridge()->second << "\n";
  out << "end\n";
}

inline LoadedGraph read_instance(std::istream& in) {
  auto fail = [](const std::string& why) -> LoadedGraph {
    throw Error(ErrorKind::kParseError, "instance: " + why);
  };
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) fail("unexpected end of input");
    return std::istringstream(line);
  };
  {
    auto s = next_line();
    std::string magic;
    int version = 0;
    s >> magic >> version;
    if (magic != "locbal-instance" || version != 1) fail("bad header");
  }
  std::size_t n = 0;
  int max_load = 0, delta = 0;
  Topology topology;
  {
    auto s = next_line();
    std::string kn, kl, kd, kt, top;
    if (!(s >> kn >> n >> kl >> max_load >> kd >> delta >> kt >> top) || kn != "n" ||
        kl != "L" || kd != "delta" || kt != "topology") {
      fail("bad size line");
    }
    topology = topology_from_string(top);
  }
  std::vector<int> loads(n);
  {
    auto s = next_line();
    std::string key;
    s >> key;
    if (key != "loads") fail("expected loads");
    for (auto& x : loads) {
      if (!(s >> x)) fail("short load vector");
    }
  }
  LoadedGraph::RawAdjacency adjacency(n);
  for (NodeId v = 0; v < n; ++v) {
    auto s = next_line();
    std::string key;
    NodeId id = 0;
    std::size_t deg = 0;
    if (!(s >> key >> id >> deg) || key != "adj" || id != v) fail("bad adjacency line");
    for (std::size_t i = 0; i < deg; ++i) {
      std::string token;
      if (!(s >> token)) fail("short adjacency line");
      const auto colon = token.find(':');
      if (colon == std::string::npos) fail("bad port entry");
      adjacency[v].emplace_back(parse_number<long long>(token.substr(0, colon)),
                                static_cast<int>(parse_number<long long>(token.substr(colon + 1))));
    }
  }
  std::optional<std::pair<NodeId, NodeId>> bridge;
  for (;;) {
    auto s = next_line();
    std::string key;
    s >> key;
    if (key == "end") break;
    if (key == "bridge") {
      NodeId a = 0, b = 0;
      if (!(s >> a >> b)) fail("bad bridge line");
      bridge = std::make_pair(a, b);
    } else {
      fail("unexpected line '" + line + "'");
    }
  }
  return LoadedGraph(adjacency, std::move(loads), max_load, delta, topology, bridge);
}

}  // namespace locbal

#endif  // LOCBAL_GRAPH_HPP_
