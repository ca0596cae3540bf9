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

#ifndef LOCBAL_FLOW_HPP_
#define LOCBAL_FLOW_HPP_

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/graph.hpp"

namespace locbal {

/// Antisymmetric edge flow. One value per edge id, meaning the amount sent
/// from the lower-id endpoint to the higher-id endpoint; f(v, u) = -f(u, v)
/// holds by construction and non-edges carry nothing.
template <class Num>
class Flow {
 public:
  Flow() = default;
  explicit Flow(std::size_t edge_count) : values_(edge_count, Num(0)) {}

  std::size_t size() const { return values_.size(); }
  const Num& stored(EdgeId e) const { return values_.at(e); }

  /// Net amount sent from `from` to `to` along edge e.
  Num along(const LoadedGraph& g, NodeId from, NodeId to) const {
    const auto e = g.edge_between(from, to);
    if (!e) return Num(0);
    return from < to ? values_[*e] : Num(-values_[*e]);
  }

  void send(const LoadedGraph& g, NodeId from, NodeId to, const Num& amount) {
    const auto e = g.edge_between(from, to);
    if (!e) throw Error(ErrorKind::kInvalidParameter, "flow on a non-edge");
    send_on(*e, from < to, amount);
  }

  void send_on(EdgeId e, bool low_to_high, const Num& amount) {
    if (low_to_high) {
      values_.at(e) += amount;
    } else {
      values_.at(e) -= amount;
    }
  }

  /// Net inflow sum_u f(u, v) for every node.
  std::vector<Num> inflow(const LoadedGraph& g) const {
    std::vector<Num> in(g.node_count(), Num(0));
    for (EdgeId e = 0; e < values_.size(); ++e) {
      const auto& [a, b] = g.edges()[e];
      in[b] += values_[e];
      in[a] -= values_[e];
    }
    return in;
  }

  friend bool operator==(const Flow&, const Flow&) = default;

 private:
  std::vector<Num> values_;
};

/// Signed amount moved over an edge in one round (positive = low id to high id).
template <class Num>
struct Movement {
  EdgeId edge = 0;
  Num amount{0};

  friend bool operator==(const Movement&, const Movement&) = default;
};

template <class Num>
struct Transcript {
  /// rounds_moves[r] holds the movements completed in round r + 1.
  std::vector<std::vector<Movement<Num>>> rounds_moves;

  void ensure_rounds(std::size_t rounds) {
    if (rounds_moves.size() < rounds) rounds_moves.resize(rounds);
  }

  /// Records a movement finished in the given (1-based) round.
  void record(std::size_t round, EdgeId edge, const Num& amount) {
    if (round == 0) throw Error(ErrorKind::kInvalidParameter, "rounds are 1-based");
    ensure_rounds(round);
    rounds_moves[round - 1].push_back({edge, amount});
  }

  Flow<Num> replay(std::size_t edge_count) const {
    Flow<Num> f(edge_count);
    for (const auto& round : rounds_moves) {
      for (const auto& m : round) f.send_on(m.edge, true, m.amount);
    }
    return f;
  }

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

template <class Num>
struct BalancingResult {
  std::vector<Num> outputs;
  Flow<Num> flow;
  std::size_t rounds = 0;
  Transcript<Num> transcript;
  bool discrete = false;
  /// False when a budget ran out before the algorithm finished.
  bool completed = true;
  /// Diagnostic message volume; LOCAL semantics ignore it.
  std::size_t message_units = 0;
};

/// The same result with every amount converted to To.
template <class To, class From>
BalancingResult<To> convert_result(const BalancingResult<From>& r) {
  BalancingResult<To> out;
  for (const From& y : r.outputs) out.outputs.push_back(To(y));
  out.flow = Flow<To>(r.flow.size());
  for (EdgeId e = 0; e < r.flow.size(); ++e) out.flow.send_on(e, true, To(r.flow.stored(e)));
  out.rounds = r.rounds;
  out.transcript.rounds_moves.resize(r.transcript.rounds_moves.size());
  for (std::size_t i = 0; i < r.transcript.rounds_moves.size(); ++i) {
    for (const auto& m : r.transcript.rounds_moves[i]) {
      out.transcript.rounds_moves[i].push_back({m.edge, To(m.amount)});
    }
  }
  out.discrete = r.discrete;
  out.completed = r.completed;
  out.message_units = r.message_units;
  return out;
}

/// Routes `amount` along a node route, adding it to the flow and to the
/// transcript at `round`.
template <class Num>
void route_amount(const LoadedGraph& g, const std::vector<NodeId>& route, const Num& amount,
                  Flow<Num>& flow, Transcript<Num>* transcript, std::size_t round) {
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    const NodeId a = route[i], b = route[i + 1];
    const auto e = g.edge_between(a, b);
    ensure(e.has_value(), "route uses a non-edge");
    flow.send_on(*e, a < b, amount);
    if (transcript) transcript->record(round, *e, a < b ? amount : Num(-amount));
  }
}

// ---- transcript export -----------------------------------------------------
//
//   locbal-transcript 1
//   rounds <R>
//   round <r> <k>                  (k movements follow, one per line)
//   move <edge id> <u> <v> <amount>  (u < v; amount signed, u -> v positive)
//   outputs <y_0> ... <y_{n-1}>
//   end

template <class Num>
void write_transcript(std::ostream& out, const LoadedGraph& g, const BalancingResult<Num>& r) {
  out << "locbal-transcript 1\n";
  out << "rounds " << r.rounds << "\n";
  for (std::size_t i = 0; i < r.transcript.rounds_moves.size(); ++i) {
    const auto& moves = r.transcript.rounds_moves[i];
    if (moves.empty()) continue;
    out << "round " << (i + 1) << ' ' << moves.size() << "\n";
    for (const auto& m : moves) {
      const auto& [a, b] = g.edges().at(m.edge);
      out << "move " << m.edge << ' ' << a << ' ' << b << ' ' << format_number(m.amount) << "\n";
    }
  }
  out << "outputs";
  for (const auto& y : r.outputs) out << ' ' << format_number(y);
  out << "\nend\n";
}

template <class Num>
Transcript<Num> read_transcript(std::istream& in, std::size_t* rounds = nullptr,
                                std::vector<Num>* outputs = nullptr) {
  Transcript<Num> t;
  std::string line, key;
  auto fail = [](const std::string& why) { throw Error(ErrorKind::kParseError, "transcript: " + why); };
  if (!std::getline(in, line) || line != "locbal-transcript 1") fail("bad header");
  while (std::getline(in, line)) {
    std::istringstream s(line);
    s >> key;
    if (key == "rounds") {
      std::size_t r = 0;
      s >> r;
      if (rounds) *rounds = r;
    } else if (key == "round") {
      std::size_t r = 0, k = 0;
      if (!(s >> r >> k) || r == 0) fail("bad round line");
      t.ensure_rounds(r);
      for (std::size_t i = 0; i < k; ++i) {
        if (!std::getline(in, line)) fail("short round");
        std::istringstream ms(line);
        std::string mk, amount;
        EdgeId e = 0;
        NodeId a = 0, b = 0;
        if (!(ms >> mk >> e >> a >> b >> amount) || mk != "move") fail("bad move line");
        t.rounds_moves[r - 1].push_back({e, parse_number<Num>(amount)});
      }
    } else if (key == "outputs") {
      std::string value;
      while (s >> value) {
        if (outputs) outputs->push_back(parse_number<Num>(value));
      }
    } else if (key == "end") {
      return t;
    } else {
      fail("unexpected line '" + line + "'");
    }
  }
  fail("missing end");
  return t;
}

}  // namespace locbal

#endif  // LOCBAL_FLOW_HPP_
