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

#ifndef LOCBAL_RUNTIME_HPP_
#define LOCBAL_RUNTIME_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/graph.hpp"

namespace locbal {

/// What a node knows before the first round.
struct NodeContext {
  /// Unique identifier, or nullopt when the run is anonymous (port numbering
  /// model only).
  std::optional<NodeId> id;
  std::size_t degree = 0;
  int load = 0;
  int max_load = 0;
  int max_degree = 0;
};

template <class Message, class Amount>
struct Outgoing {
  std::optional<Message> message;
  /// Load shipped through the port this round; must be nonnegative.
  Amount transfer{0};
};

template <class Message, class Amount>
struct Incoming {
  std::optional<Message> message;
  Amount transfer{0};
};

/// One node's behaviour in the synchronous LOCAL model. Each round the
/// runtime calls compose() on every running node, delivers all messages and
/// load transfers, then calls consume(). Ports are 1-based; vectors are
/// indexed by port - 1.
template <class Message, class Amount>
class NodeProgram {
 public:
  using message_type = Message;
  using amount_type = Amount;

  virtual ~NodeProgram() = default;

  virtual void init(const NodeContext& context) = 0;
  virtual std::vector<Outgoing<Message, Amount>> compose() = 0;
  virtual void consume(const std::vector<Incoming<Message, Amount>>& inbox) = 0;
  virtual bool halted() const = 0;
  /// Final load; must equal the initial load plus net received transfers.
  virtual Amount output() const = 0;
};

template <class Message, class Amount>
using ProgramFactory = std::function<std::unique_ptr<NodeProgram<Message, Amount>>(NodeId)>;

struct RunOptions {
  std::size_t max_rounds = 0;
  bool anonymous = false;
};

/// Thrown when the round budget runs out; carries the partial result.
template <class Amount>
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(BalancingResult<Amount> partial, const std::string& what)
      : Error(ErrorKind::kBudgetExceeded, what), partial_(std::move(partial)) {}
  const BalancingResult<Amount>& partial() const { return partial_; }

 private:
  BalancingResult<Amount> partial_;
};

namespace detail {

template <class T>
concept Sized = requires(const T& t) { t.size(); };

template <class Message>
std::size_t message_units(const Message& m) {
  if constexpr (Sized<Message>) {
    return static_cast<std::size_t>(m.size());
  } else {
    return sizeof(Message);
  }
}

}  // namespace detail

/// Message-passing execution. Rounds are counted while at least one node is
/// running; a program that halts in init() costs zero rounds.
template <class Message, class Amount>
BalancingResult<Amount> run_sync(const LoadedGraph& graph,
                                 const ProgramFactory<Message, Amount>& factory,
                                 const RunOptions& options) {
  const std::size_t n = graph.node_count();
  std::vector<std::unique_ptr<NodeProgram<Message, Amount>>> nodes;
  nodes.reserve(n);
  for (NodeId v = 0; v < n; ++v) {
    nodes.push_back(factory(v));
    NodeContext context;
    if (!options.anonymous) context.id = v;
    context.degree = graph.degree(v);
    context.load = graph.load(v);
    context.max_load = graph.max_load();
    context.max_degree = graph.max_degree();
    nodes.back()->init(context);
  }

  BalancingResult<Amount> result;
  result.flow = Flow<Amount>(graph.edge_count());
  std::vector<Amount> held(n);
  for (NodeId v = 0; v < n; ++v) held[v] = Amount(graph.load(v));

  auto all_halted = [&] {
    for (const auto& node : nodes) {
      if (!node->halted()) return false;
    }
    return true;
  };

  auto assemble_outputs = [&] {
    result.outputs.clear();
    for (NodeId v = 0; v < n; ++v) result.outputs.push_back(nodes[v]->output());
  };

  while (!all_halted()) {
    if (result.rounds >= options.max_rounds) {
      result.completed = false;
      assemble_outputs();
      throw BudgetExceeded<Amount>(result, "round budget of " + std::to_string(options.max_rounds) +
                                               " exhausted");
    }
    ++result.rounds;
    const std::size_t round = result.rounds;

    std::vector<std::vector<Outgoing<Message, Amount>>> outboxes(n);
    std::vector<bool> running(n);
    for (NodeId v = 0; v < n; ++v) {
      running[v] = !nodes[v]->halted();
      if (!running[v]) continue;
      outboxes[v] = nodes[v]->compose();
      if (outboxes[v].size() != graph.degree(v)) {
        throw Error(ErrorKind::kProtocolViolation,
                    "node " + std::to_string(v) + " composed a wrong number of ports");
      }
    }

    std::vector<std::vector<Incoming<Message, Amount>>> inboxes(n);
    for (NodeId v = 0; v < n; ++v) inboxes[v].resize(graph.degree(v));
    for (NodeId v = 0; v < n; ++v) {
      if (!running[v]) continue;
      for (std::size_t i = 0; i < outboxes[v].size(); ++i) {
        auto& out = outboxes[v][i];
        const PortLink& link = graph.ports(v)[i];
        if (out.transfer < Amount(0)) {
          throw Error(ErrorKind::kProtocolViolation,
                      "negative transfer from node " + std::to_string(v));
        }
        if (out.transfer != Amount(0)) {
          if (!running[link.neighbor]) {
            throw Error(ErrorKind::kProtocolViolation,
                        "transfer into halted node " + std::to_string(link.neighbor));
          }
          held[v] -= out.transfer;
          held[link.neighbor] += out.transfer;
          const bool low_to_high = v < link.neighbor;
          result.flow.send_on(link.edge, low_to_high, out.transfer);
          result.transcript.record(round, link.edge,
                                   low_to_high ? out.transfer : Amount(-out.transfer));
        }
        if (out.message) result.message_units += detail::message_units(*out.message);
        auto& in = inboxes[link.neighbor][link.remote_port - 1];
        in.message = std::move(out.message);
        in.transfer = out.transfer;
      }
    }
    for (NodeId v = 0; v < n; ++v) {
      if (running[v]) nodes[v]->consume(inboxes[v]);
    }
  }
  result.transcript.ensure_rounds(result.rounds);

  assemble_outputs();
  for (NodeId v = 0; v < n; ++v) {
    const Amount& y = result.outputs[v];
    if (y < Amount(0) || y > Amount(graph.max_load())) {
      throw Error(ErrorKind::kProtocolViolation,
                  "node " + std::to_string(v) + " output outside [0, L]");
    }
    if (y != held[v]) {
      throw Error(ErrorKind::kProtocolViolation,
                  "node " + std::to_string(v) + " output disagrees with its received load");
    }
  }
  return result;
}

/// Radius-r ball around a node: the nodes within distance r with their loads
/// and full port lists. Collecting it costs r rounds in the LOCAL model.
struct BallView {
  NodeId center = 0;
  std::size_t radius = 0;
  std::vector<NodeId> nodes;         // BFS order, center first
  std::vector<std::size_t> distance;  // parallel to nodes
  std::vector<int> loads;             // parallel to nodes
  std::vector<std::vector<PortLink>> ports;

  std::size_t rounds_charged() const { return radius; }

  friend bool operator==(const BallView&, const BallView&) = default;
};

inline BallView gather(const LoadedGraph& graph, NodeId v, std::size_t radius) {
  const auto dist = bfs_distances(graph, v, radius);
  BallView ball;
  ball.center = v;
  ball.radius = radius;
  std::vector<std::pair<std::size_t, NodeId>> order;
  for (NodeId u = 0; u < graph.node_count(); ++u) {
    if (dist[u] != kUnreachable) order.emplace_back(dist[u], u);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [d, u] : order) {
    ball.nodes.push_back(u);
    ball.distance.push_back(d);
    ball.loads.push_back(graph.load(u));
    ball.ports.push_back(graph.ports(u));
  }
  return ball;
}

}  // namespace locbal

#endif  // LOCBAL_RUNTIME_HPP_
