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

#ifndef LOCBAL_FRACTIONAL_HPP_
#define LOCBAL_FRACTIONAL_HPP_

// Fractional balancing in poly(L, log Delta) rounds.
//
// Loads are doubled onto 2L unit slots per node. Level by level from the top,
// unfrozen load at height h is routed into non-full cone slots through an
// eps-maximal fractional matching. What stays behind is either at most eps
// (rounded to 0 and frozen; the removed part is a deficit) or more than eps,
// in which case every cone slot holds at least 1 - eps and is rounded up to 1
// and frozen (the added part is a surplus). Each slot is rounded at most once.
// At the end the ledger is undone and loads are halved.
//
// Num is Rational (exact, default) or double (tolerance 1e-9).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/general_discrete.hpp"
#include "locbal/graph.hpp"

namespace locbal {

/// Comparison slack for a number type: 0 when exact, 1e-9 for doubles.
template <class Num>
Num numeric_tolerance() {
  if constexpr (kIsExact<Num>) {
    return Num(0);
  } else {
    return Num(1e-9);
  }
}

/// The largest admissible eps for max load L, namely 1/(4L).
template <class Num>
Num default_epsilon(int max_load) {
  return Num(1) / Num(4 * std::max(max_load, 1));
}

/// Slot values in multiples of a unit: `one` is a full slot. Exact runs use
/// long long with one = 2^K; other arithmetic uses one = 1.
template <class Num>
struct Scale {
  Num one{1};
  /// Largest representable amount that still counts as "at most eps".
  Num eps{0};
  /// Allowances are rounded down to multiples of grid.
  Num grid{0};
  Num tol{0};
};

template <class Num>
class FractionalSlotConfig {
 public:
  FractionalSlotConfig() = default;
  FractionalSlotConfig(std::size_t node_count, int levels, Num one = Num(1))
      : nodes_(node_count),
        levels_(levels),
        one_(one),
        cells_(node_count * static_cast<std::size_t>(levels)) {}

  std::size_t node_count() const { return nodes_; }
  int levels() const { return levels_; }
  const Num& one() const { return one_; }

  const Num& load(NodeId v, int i) const { return cell(v, i).load; }
  void set_load(NodeId v, int i, const Num& value) { cell(v, i).load = value; }
  void add_load(NodeId v, int i, const Num& delta) { cell(v, i).load += delta; }
  bool frozen(NodeId v, int i) const { return cell(v, i).frozen; }
  /// f_i(v): all of a frozen slot's load, none of an unfrozen one's.
  Num frozen_amount(NodeId v, int i) const { return frozen(v, i) ? load(v, i) : Num(0); }
  void freeze(NodeId v, int i) { cell(v, i).frozen = true; }
  bool rounded(NodeId v, int i) const { return cell(v, i).rounded; }
  const Num& surplus(NodeId v, int i) const { return cell(v, i).surplus; }
  const Num& deficit(NodeId v, int i) const { return cell(v, i).deficit; }

  /// Rounds a slot to 0 (deficit) or full (surplus) and freezes it; a slot
  /// can be rounded only once.
  void round_to(NodeId v, int i, bool up) {
    Cell& c = cell(v, i);
    ensure(!c.rounded, "slot rounded twice");
    c.rounded = true;
    c.frozen = true;
    if (up) {
      c.surplus = one_ - c.load;
      c.load = one_;
    } else {
      c.deficit = c.load;
      c.load = Num(0);
    }
  }

  /// Rounded load of a node.
  Num node_load(NodeId v) const {
    Num total(0);
    for (int i = 1; i <= levels_; ++i) total += load(v, i);
    return total;
  }

  /// Load with the ledger undone.
  Num real_load(NodeId v) const {
    Num total(0);
    for (int i = 1; i <= levels_; ++i) total += load(v, i) - surplus(v, i) + deficit(v, i);
    return total;
  }

 private:
  struct Cell {
    Num load{0};
    Num surplus{0};
    Num deficit{0};
    bool frozen = false;
    bool rounded = false;
  };

  Cell& cell(NodeId v, int i) { return cells_.at(index(v, i)); }
  const Cell& cell(NodeId v, int i) const { return cells_.at(index(v, i)); }
  std::size_t index(NodeId v, int i) const {
    if (v >= nodes_ || i < 1 || i > levels_) throw Error(ErrorKind::kOutOfRange, "slot out of range");
    return v * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(i - 1);
  }

  std::size_t nodes_ = 0;
  int levels_ = 0;
  Num one_{1};
  std::vector<Cell> cells_;
};

/// Per-node net adjustment deficit - surplus; adding it to the rounded load
/// gives the real load.
template <class Num>
std::vector<Num> ledger_close(const FractionalSlotConfig<Num>& config) {
  std::vector<Num> adjust(config.node_count(), Num(0));
  for (NodeId v = 0; v < config.node_count(); ++v) {
    for (int i = 1; i <= config.levels(); ++i) adjust[v] += config.deficit(v, i) - config.surplus(v, i);
  }
  return adjust;
}

template <class Num>
struct CapacitatedBipartiteGraph {
  std::vector<Slot> left;
  std::vector<Slot> right;
  std::vector<Num> left_capacity;
  std::vector<Num> right_capacity;
  /// (left index, right index)
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t max_degree() const {
    std::vector<std::size_t> dl(left.size(), 0), dr(right.size(), 0);
    std::size_t best = 0;
    for (const auto& [t, s] : edges) best = std::max({best, ++dl[t], ++dr[s]});
    return best;
  }
};

template <class Num>
struct FractionalMatching {
  std::vector<Num> y;  // parallel to edges
  std::size_t iterations = 0;
  /// max over edges of min endpoint slack; at most eps.
  Num worst_slack{0};
};

/// Largest power of two not above x (x > 0).
template <class Num>
Num power_of_two_below(const Num& x) {
  Num g(1);
  while (g > x) g /= Num(2);
  while (g * Num(2) <= x) g *= Num(2);
  return g;
}

/// x rounded down to a multiple of grid (x >= 0).
template <class Num>
Num floor_to_grid(const Num& x, const Num& grid) {
  if constexpr (std::is_integral_v<Num>) {
    return x / grid * grid;
  } else if constexpr (std::is_floating_point_v<Num>) {
    return std::floor(x / grid) * grid;
  } else {
    const Num q = x / grid;
    using Int = std::remove_cvref_t<decltype(boost::multiprecision::numerator(q))>;
    const Int whole = boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q);
    return Num(whole) * grid;
  }
}

namespace detail {

// Geometric raising on a graph whose capacities are in [0, scale.one].
template <class Num>
FractionalMatching<Num> raise_matching(const CapacitatedBipartiteGraph<Num>& f, const Scale<Num>& scale) {
  FractionalMatching<Num> out;
  out.y.assign(f.edges.size(), Num(0));
  Num delta = scale.grid * Num(2);
  const Num& eps = scale.eps;

  std::vector<Num> slack_l = f.left_capacity, slack_r = f.right_capacity;
  std::vector<std::size_t> active;
  for (std::size_t e = 0; e < f.edges.size(); ++e) active.push_back(e);
  std::vector<std::size_t> deg_l(f.left.size()), deg_r(f.right.size());
  std::vector<Num> allow_l(f.left.size()), allow_r(f.right.size());
  std::vector<Num> dec_l(f.left.size(), Num(0)), dec_r(f.right.size(), Num(0));

  for (;;) {
    std::erase_if(active, [&](std::size_t e) {
      const auto [t, s] = f.edges[e];
      return !(slack_l[t] > eps) || !(slack_r[s] > eps);
    });
    if (active.empty()) break;
    for (auto e : active) {
      const auto [t, s] = f.edges[e];
      deg_l[t] = deg_r[s] = 0;
    }
    for (auto e : active) {
      const auto [t, s] = f.edges[e];
      ++deg_l[t];
      ++deg_r[s];
    }
    for (auto e : active) {
      const auto [t, s] = f.edges[e];
      if (deg_l[t] != 0) {
        allow_l[t] = std::min(delta, floor_to_grid(Num(slack_l[t] / Num(deg_l[t])), scale.grid));
        deg_l[t] = 0;  // computed
      }
      if (deg_r[s] != 0) {
        allow_r[s] = std::min(delta, floor_to_grid(Num(slack_r[s] / Num(deg_r[s])), scale.grid));
        deg_r[s] = 0;
      }
    }
    for (auto e : active) {
      const auto [t, s] = f.edges[e];
      const Num inc = std::min(allow_l[t], allow_r[s]);
      out.y[e] += inc;
      dec_l[t] += inc;
      dec_r[s] += inc;
    }
    for (auto e : active) {
      const auto [t, s] = f.edges[e];
      if (dec_l[t] != Num(0)) {
        slack_l[t] -= dec_l[t];
        dec_l[t] = Num(0);
      }
      if (dec_r[s] != Num(0)) {
        slack_r[s] -= dec_r[s];
        dec_r[s] = Num(0);
      }
    }
    ++out.iterations;
    ensure(out.iterations <= 256 + 4 * (f.left.size() + f.right.size()),
           "fractional matching does not converge");
    if (delta < scale.one) delta = std::min(scale.one, Num(delta * 2));
  }

  // Post-check: feasibility and eps-maximality.
  std::vector<Num> sum_l(f.left.size(), Num(0)), sum_r(f.right.size(), Num(0));
  for (std::size_t e = 0; e < f.edges.size(); ++e) {
    ensure(out.y[e] >= Num(0), "negative matching value");
    sum_l[f.edges[e].first] += out.y[e];
    sum_r[f.edges[e].second] += out.y[e];
  }
  for (std::size_t t = 0; t < f.left.size(); ++t) {
    ensure(sum_l[t] <= f.left_capacity[t] + scale.tol, "left capacity exceeded");
  }
  for (std::size_t s = 0; s < f.right.size(); ++s) {
    ensure(sum_r[s] <= f.right_capacity[s] + scale.tol, "right capacity exceeded");
  }
  for (const auto& [t, s] : f.edges) {
    const Num slack =
        std::min(Num(f.left_capacity[t] - sum_l[t]), Num(f.right_capacity[s] - sum_r[s]));
    if (slack > out.worst_slack) out.worst_slack = slack;
  }
  ensure(out.worst_slack <= eps + scale.tol, "matching is not eps-maximal");
  return out;
}

}  // namespace detail

/// Eps-maximal fractional matching by geometric raising. In round r every
/// edge between two unsaturated vertices (slack > eps) grows by the smaller
/// of its endpoints' allowances min(delta_r, slack / active degree), with
/// delta_0 = 2g doubling each round up to 1. No capacity is ever exceeded,
/// and once delta_r = 1 the vertex of smallest allowance saturates, so the
/// loop ends. The result is checked for eps-maximality before returning.
///
/// Allowances are rounded down to a power-of-two grid g <= eps / (4d), which
/// keeps every value dyadic. An active vertex has slack / degree > 4g, so
/// rounding loses at most half an allowance, and the saturating vertex ends
/// with slack below d * g < eps.
template <class Num>
FractionalMatching<Num> eps_maximal_fractional_matching(const CapacitatedBipartiteGraph<Num>& f,
                                                        const Num& eps,
                                                        std::size_t degree_bound = 0) {
  if (!(eps > Num(0)) || !(eps < Num(1))) {
    throw Error(ErrorKind::kInvalidParameter, "eps must lie in (0, 1)");
  }
  if (f.left_capacity.size() != f.left.size() || f.right_capacity.size() != f.right.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "capacity vectors");
  }
  for (const auto* caps : {&f.left_capacity, &f.right_capacity}) {
    for (const Num& c : *caps) {
      if (c < Num(0) || c > Num(1)) throw Error(ErrorKind::kInvalidParameter, "capacity outside [0, 1]");
    }
  }
  const std::size_t d = std::max<std::size_t>(1, degree_bound ? degree_bound : f.max_degree());
  Scale<Num> scale;
  scale.eps = eps;
  scale.grid = power_of_two_below(Num(eps / Num(4 * d)));
  scale.tol = numeric_tolerance<Num>();
  return detail::raise_matching(f, scale);
}

struct FractionalOptions {
  std::size_t max_ball_nodes = 200000;
  bool record_transcript = true;
};

struct FractionalLevelStats {
  int level = 0;
  std::size_t sources = 0;
  std::size_t targets = 0;
  std::size_t edges = 0;
  std::size_t iterations = 0;
  std::size_t deficit_freezes = 0;
  std::size_t surplus_freezes = 0;
};

struct FractionalStats {
  std::vector<FractionalLevelStats> levels;
  std::size_t matching_calls = 0;
  /// Largest eps-maximality witness over all matchings (as a double).
  double worst_matching_slack = 0;
  /// max |adjustment| over nodes and the pre-normalisation max edge gap.
  double max_adjustment = 0;
  double max_rounded_gap = 0;
};

/// Rounds charged for one level: 2L to build F_h (cone radius < 2L), 4L per
/// matching iteration (two F_h exchanges, each up to 2L hops), 2L to move,
/// round and freeze.
inline std::size_t fractional_level_rounds(int max_load, std::size_t iterations) {
  const auto l = static_cast<std::size_t>(max_load);
  return 2 * l + 4 * l * iterations + 2 * l;
}

namespace detail {

template <class Num>
bool fractional_cone_full(const FractionalSlotConfig<Num>& c, const BallIndex& balls, NodeId v,
                          int level) {
  bool full = true;
  for_each_cone_slot(balls, v, level, [&](NodeId u, int j) {
    if (full && c.load(u, j) != c.one()) full = false;
  });
  return full;
}

template <class Num>
void collapse_unfrozen(FractionalSlotConfig<Num>& c, NodeId v, const Num& tol) {
  Num pool(0);
  for (int i = 1; i <= c.levels(); ++i) {
    if (c.frozen(v, i)) continue;
    pool += c.load(v, i);
    c.set_load(v, i, Num(0));
  }
  for (int i = 1; i <= c.levels() && pool > Num(0); ++i) {
    if (c.frozen(v, i)) continue;
    const Num take = std::min(c.one(), pool);
    c.set_load(v, i, take);
    pool -= take;
  }
  ensure(pool <= tol, "collapse overflowed the column");
}

template <class Value>
struct FractionalRun {
  FractionalSlotConfig<Value> config;
  Flow<Value> doubled;
  Transcript<Value> transcript;
  std::size_t rounds = 0;
};

// The level loop, on doubled loads measured in units of scale.one.
template <class Value>
FractionalRun<Value> fractional_levels(const LoadedGraph& graph, const BallIndex& balls,
                                       const Scale<Value>& scale, bool record,
                                       FractionalStats* stats) {
  const int levels = 2 * graph.max_load();
  const std::size_t n = graph.node_count();
  const Value& one = scale.one;
  const Value& eps = scale.eps;

  FractionalRun<Value> run{FractionalSlotConfig<Value>(n, levels, one), Flow<Value>(graph.edge_count()),
                           {}, static_cast<std::size_t>(levels)};  // gather the radius-(2L-1) ball
  auto& config = run.config;
  for (NodeId v = 0; v < n; ++v) {
    for (int i = 1; i <= 2 * graph.load(v); ++i) config.set_load(v, i, one);
  }
  for (NodeId v = 0; v < n; ++v) {
    for (int i = 2 * graph.load(v); i >= 1; --i) {
      if (fractional_cone_full(config, balls, v, i)) {
        for (int j = 1; j <= i; ++j) config.freeze(v, j);
        break;
      }
    }
  }

  std::vector<std::size_t> right_index;
  for (int h = levels; h >= 1; --h) {
    CapacitatedBipartiteGraph<Value> f;
    for (NodeId v = 0; v < n; ++v) {
      if (config.frozen(v, h) || !(config.load(v, h) > Value(0))) continue;
      f.left.push_back({v, h});
      f.left_capacity.push_back(config.load(v, h) - config.frozen_amount(v, h));
    }
    right_index.assign(n * static_cast<std::size_t>(h), kUnreachable);
    for (std::size_t t = 0; t < f.left.size(); ++t) {
      for_each_cone_slot(balls, f.left[t].node, h, [&](NodeId u, int j) {
        if (!(config.load(u, j) < one)) return;
        ensure(!config.frozen(u, j), "non-full frozen slot inside a cone");
        auto& idx = right_index[u * static_cast<std::size_t>(h) + static_cast<std::size_t>(j)];
        if (idx == kUnreachable) {
          idx = f.right.size();
          f.right.push_back({u, j});
          f.right_capacity.push_back(one - config.load(u, j));
        }
        f.edges.emplace_back(t, idx);
      });
    }
    const FractionalMatching<Value> m = raise_matching(f, scale);
    const std::size_t round = run.rounds + fractional_level_rounds(graph.max_load(), m.iterations);
    run.rounds = round;
    if (stats) {
      ++stats->matching_calls;
      stats->worst_matching_slack =
          std::max(stats->worst_matching_slack, to_double(m.worst_slack) / to_double(one));
    }

    // All of a level's transfers land in the same round; the transcript
    // keeps their net per edge.
    Flow<Value> moved(graph.edge_count());
    for (std::size_t e = 0; e < f.edges.size(); ++e) {
      if (!(m.y[e] > Value(0))) continue;
      const Slot from = f.left[f.edges[e].first], to = f.right[f.edges[e].second];
      config.add_load(from.node, from.level, -m.y[e]);
      config.add_load(to.node, to.level, m.y[e]);
      if (from.node != to.node) {
        route_amount(graph, balls.route(from.node, to.node), m.y[e], moved,
                     static_cast<Transcript<Value>*>(nullptr), round);
      }
    }
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      const Value& amount = moved.stored(e);
      if (amount == Value(0)) continue;
      run.doubled.send_on(e, true, amount);
      if (record) run.transcript.record(round, e, amount);
    }

    FractionalLevelStats level{h, f.left.size(), f.right.size(), f.edges.size(), m.iterations, 0, 0};
    for (const Slot& t : f.left) {
      const Value rest = config.load(t.node, h);
      ensure(rest >= -scale.tol, "negative slot load");
      if (rest <= eps) {
        config.round_to(t.node, h, false);
        ++level.deficit_freezes;
        continue;
      }
      for_each_cone_slot(balls, t.node, h, [&](NodeId u, int j) {
        if (config.frozen(u, j)) {
          ensure(config.load(u, j) == one, "frozen cone slot is not full");
          return;
        }
        ensure(config.load(u, j) >= one - eps - scale.tol, "cone slot below 1 - eps");
        config.round_to(u, j, true);
      });
      config.freeze(t.node, h);
      ++level.surplus_freezes;
    }
    for (NodeId v = 0; v < n; ++v) {
      collapse_unfrozen(config, v, scale.tol);
      for (int i = h; i <= levels; ++i) {
        ensure(config.frozen(v, i) || config.load(v, i) <= scale.tol,
               "unfrozen load left at a handled level");
      }
    }
    if (stats) stats->levels.push_back(level);
  }
  return run;
}

}  // namespace detail

/// Exact runs (Rational) compute in integer multiples of 2^-K, where 2^-K is
/// the matching grid, and convert at the end; every intermediate value of the
/// exact algorithm is such a multiple. Floating runs compute in Num directly.
template <class Num = Rational>
BalancingResult<Num> run_fractional(const LoadedGraph& graph, const Num& eps,
                                    const FractionalOptions& options = {},
                                    FractionalStats* stats = nullptr) {
  const int max_load = graph.max_load();
  const int levels = 2 * max_load;
  const std::size_t n = graph.node_count();
  const Num tol = numeric_tolerance<Num>();
  if (!(eps > Num(0)) || eps * Num(4 * std::max(max_load, 1)) > Num(1)) {
    throw Error(ErrorKind::kInvalidParameter, "eps must lie in (0, 1/(4L)]");
  }
  const auto radius = static_cast<std::size_t>(std::max(levels - 1, 0));
  const std::size_t bound = std::min(ball_size_bound(graph.max_degree(), radius), n);
  if (bound > options.max_ball_nodes) {
    throw Error(ErrorKind::kBudgetExceeded,
                "ball bound " + std::to_string(bound) + " exceeds the budget of " +
                    std::to_string(options.max_ball_nodes) + " nodes");
  }
  const BallIndex balls(graph, radius);
  const std::size_t d = std::max<std::size_t>(1, static_cast<std::size_t>(std::max(levels, 1)) * bound);
  const Num grid = power_of_two_below(Num(eps / Num(4 * d)));

  // Converts an engine value to Num, dividing by extra (1 or 2).
  std::vector<Num> rounded(n), adjust(n);
  BalancingResult<Num> result;
  result.discrete = false;
  result.flow = Flow<Num>(graph.edge_count());
  auto finish = [&](const auto& run, const auto& to_num) {
    const auto adj = ledger_close(run.config);
    for (NodeId v = 0; v < n; ++v) {
      rounded[v] = to_num(run.config.node_load(v));
      adjust[v] = to_num(adj[v]);
    }
    result.rounds = run.rounds;
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      result.flow.send_on(e, true, to_num(run.doubled.stored(e)) / Num(2));
    }
    if (options.record_transcript) {
      result.transcript.rounds_moves.resize(run.transcript.rounds_moves.size());
      for (std::size_t r = 0; r < run.transcript.rounds_moves.size(); ++r) {
        for (const auto& mv : run.transcript.rounds_moves[r]) {
          result.transcript.rounds_moves[r].push_back({mv.edge, to_num(mv.amount) / Num(2)});
        }
      }
      result.transcript.ensure_rounds(result.rounds);
    }
  };
  if constexpr (kIsExact<Num>) {
    using Units = long long;
    Units one = 1;
    Num g = grid;
    while (g < Num(1)) {
      g *= Num(2);
      one *= 2;
      ensure(one < (Units(1) << 40), "matching grid too fine for 64-bit units");
    }
    Scale<Units> scale;
    scale.one = one;
    // floor(eps * one): a unit count is "at most eps" iff it is at most this.
    const Num scaled = eps * Num(one);
    scale.eps = static_cast<Units>(to_double(floor_to_grid(scaled, Num(1))));
    scale.grid = 1;
    const auto run = detail::fractional_levels(graph, balls, scale, options.record_transcript, stats);
    finish(run, [&](Units u) { return Num(u) / Num(one); });
  } else {
    Scale<Num> scale;
    scale.eps = eps;
    scale.grid = grid;
    scale.tol = tol;
    const auto run = detail::fractional_levels(graph, balls, scale, options.record_transcript, stats);
    finish(run, [](const Num& x) { return x; });
  }

  Num max_gap(0), max_adjust(0);
  for (const auto& [a, b] : graph.edges()) {
    const Num gap = abs_value(Num(rounded[a] - rounded[b]));
    if (gap > max_gap) max_gap = gap;
  }
  ensure(max_gap <= Num(1) + tol, "rounded configuration is unhappy");
  for (const Num& a : adjust) {
    if (abs_value(a) > max_adjust) max_adjust = abs_value(a);
  }
  ensure(max_adjust <= Num(levels) * eps + tol, "ledger adjustment exceeds 2L eps");
  if (stats) {
    stats->max_adjustment = to_double(max_adjust);
    stats->max_rounded_gap = to_double(max_gap);
  }

  result.outputs.resize(n);
  for (NodeId v = 0; v < n; ++v) result.outputs[v] = (rounded[v] + adjust[v]) / Num(2);
  const auto in = result.flow.inflow(graph);
  for (NodeId v = 0; v < n; ++v) {
    ensure(abs_value(Num(Num(graph.load(v)) + in[v] - result.outputs[v])) <= tol * Num(levels),
           "fractional result does not conserve load");
  }
  return result;
}

}  // namespace locbal

#endif  // LOCBAL_FRACTIONAL_HPP_
