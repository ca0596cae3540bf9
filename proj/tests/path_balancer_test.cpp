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

#include "locbal/path_balancer.hpp"

#include <numeric>

#include "gtest/gtest.h"

namespace locbal {
namespace {

// Heights 3 3 2 3 2 1: token (0,3) is 2-stable through (2,2), token (3,3) is
// not because (5,2) is empty; adjacent heights differ by at most one.
SlotConfiguration figure_like_config() {
  return slots_from_loads({3, 3, 2, 3, 2, 1}, 4);
}

SlotConfiguration random_config(LineKind kind, std::size_t width, int levels, SplitMix64& rng) {
  SlotConfiguration c(kind, width, levels);
  for (std::size_t v = 0; v < width; ++v) {
    for (int i = 1; i <= levels; ++i) c.set(static_cast<long long>(v), i, rng.below(2) == 1);
  }
  return c;
}

long long sum(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0LL); }

void expect_happy(const LoadedGraph& g, const std::vector<long long>& y) {
  for (const auto& [a, b] : g.edges()) {
    EXPECT_LE(std::abs(y[a] - y[b]), 1) << "edge " << a << "-" << b;
  }
}

TEST(Slots, FromLoads) {
  EXPECT_EQ(slots_from_loads({0}, 3).total_tokens(), 0);
  const auto c = slots_from_loads({3}, 4);
  EXPECT_TRUE(c.occupied(0, 3));
  EXPECT_FALSE(c.occupied(0, 4));
  const auto d = slots_from_loads({2, 0, 1}, 2);
  EXPECT_EQ(d.loads(), (std::vector<int>{2, 0, 1}));
  EXPECT_EQ(d.total_tokens(), 3);
  EXPECT_THROW(slots_from_loads({5}, 4), Error);
}

TEST(Stability, FigureConfiguration) {
  const auto c = figure_like_config();
  EXPECT_TRUE(c.occupied(2, 2));  // supports token (0,3) along k = 2
  const auto two = is_k_stable(c, 2);
  EXPECT_FALSE(two.stable);
  ASSERT_EQ(two.violations.size(), 1u);
  EXPECT_EQ(two.violations[0], (std::pair<long long, int>(3, 3)));
  EXPECT_TRUE(is_k_stable(c, 0).stable);
  EXPECT_TRUE(is_k_stable(c, 1).stable);
  EXPECT_TRUE(is_k_stable(c, -1).stable);
}

TEST(Stability, BottomFilledIsZeroStable) {
  SplitMix64 rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> loads(20);
    for (int& x : loads) x = static_cast<int>(rng.between(0, 6));
    EXPECT_TRUE(is_k_stable(slots_from_loads(loads, 6), 0).stable);
  }
}

TEST(Push, IdempotentWhenAlreadyStable) {
  SplitMix64 rng(2);
  for (int ell = -3; ell <= 3; ++ell) {
    const auto c = ell_push(random_config(LineKind::kCycle, 15, 5, rng), ell);
    EXPECT_TRUE(is_k_stable(c, ell).stable);
    EXPECT_EQ(ell_push(c, ell), c);
  }
}

TEST(Push, OnePushKeepsZeroAndMinusOne) {
  // A rising ramp then a cliff is 0- and (-1)-stable but not 1-stable.
  auto c = slots_from_loads({1, 2, 3, 0, 0, 0}, 3, LineKind::kCycle);
  ASSERT_TRUE(is_k_stable(c, -1).stable);
  ASSERT_FALSE(is_k_stable(c, 1).stable);
  c = ell_push(c, 1);
  EXPECT_TRUE(is_k_stable(c, 1).stable);
  EXPECT_TRUE(is_k_stable(c, 0).stable);
  EXPECT_TRUE(is_k_stable(c, -1).stable);
}

TEST(Push, ConservesTokensOnEveryKind) {
  SplitMix64 rng(3);
  for (auto kind : {LineKind::kCycle, LineKind::kFinitePath}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto c = random_config(kind, 1 + rng.below(12), 1 + static_cast<int>(rng.below(6)), rng);
      const int ell = static_cast<int>(rng.between(-4, 4));
      EXPECT_EQ(ell_push(c, ell).total_tokens(), c.total_tokens());
    }
  }
}

TEST(Push, LemmaOnCycles) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = static_cast<int>(rng.between(-3, 3));
    const int ell = static_cast<int>(rng.between(-3, 3));
    auto c = random_config(LineKind::kCycle, 3 + rng.below(14), 1 + static_cast<int>(rng.below(6)), rng);
    c = ell_push(c, k);
    ASSERT_TRUE(is_k_stable(c, k).stable);
    EXPECT_TRUE(is_k_stable(ell_push(c, ell), k).stable) << "k=" << k << " l=" << ell;
  }
}

TEST(Push, FlowReproducesLoadChanges) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t w = 4 + rng.below(10);
    auto c = random_config(LineKind::kCycle, w, 4, rng);
    LineFlow flow(LineKind::kCycle, w);
    const auto after = ell_push(c, static_cast<int>(rng.between(-3, 3)), &flow);
    const auto f = flow.edges();
    const auto before_loads = c.loads(), after_loads = after.loads();
    for (std::size_t v = 0; v < w; ++v) {
      const long long in = f[(v + w - 1) % w] - f[v];
      EXPECT_EQ(before_loads[v] + in, after_loads[v]);
    }
  }
}

TEST(A1, ConstantInputUnchanged) {
  const auto c = slots_from_loads(std::vector<int>(30, 3), 5, LineKind::kCycle);
  const auto out = run_a1(c);
  EXPECT_EQ(out.config, c);
  EXPECT_TRUE(out.phases.empty());
  EXPECT_EQ(out.rounds, 24u * 5u);
}

TEST(A1, StepInputBecomesRangeStable) {
  std::vector<int> loads(200, 0);
  for (std::size_t v = 100; v < 200; ++v) loads[v] = 8;
  const auto c = slots_from_loads(loads, 8, LineKind::kCycle);
  const auto out = run_a1(c);
  EXPECT_TRUE(is_range_stable(out.config, -3, 3));
  EXPECT_EQ(out.config.total_tokens(), c.total_tokens());
}

TEST(A2, BruteForceOnShortPaths) {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> loads(2 + rng.below(60));
    for (int& x : loads) x = static_cast<int>(rng.between(0, 5));
    const auto out = run_a2(loads, false, 5);
    EXPECT_EQ(out.branch, A2Branch::kBruteForce);
    EXPECT_TRUE(is_range_stable(out.config, -3, 3));
    EXPECT_EQ(out.config.total_tokens(), sum(loads));
  }
}

TEST(A2, ConstantLongPathIsIdentity) {
  const std::vector<int> loads(400, 1);
  const auto out = run_a2(loads, false, 1);
  EXPECT_EQ(out.branch, A2Branch::kExtended);
  EXPECT_EQ(out.config.loads(), loads);
  EXPECT_TRUE(out.phases.empty());
}

TEST(A2, StepOnLongPathStaysInside) {
  std::vector<int> loads(600, 0);
  for (std::size_t v = 300; v < 600; ++v) loads[v] = 2;
  const auto out = run_a2(loads, false, 2);
  ASSERT_EQ(out.branch, A2Branch::kExtended);
  EXPECT_EQ(out.left_constant, 0);
  EXPECT_EQ(out.right_constant, 2);
  EXPECT_TRUE(is_range_stable(out.config, -3, 3));
  EXPECT_EQ(out.config.total_tokens(), sum(loads));
  EXPECT_EQ(out.rounds, 3 * a1_rounds(2));
}

TEST(A2, RandomLongPathsFlattenEndpoints) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> loads(300 + rng.below(300));
    for (int& x : loads) x = static_cast<int>(rng.between(0, 2));
    const auto out = run_a2(loads, false, 2);
    ASSERT_EQ(out.branch, A2Branch::kExtended);
    EXPECT_TRUE(is_range_stable(out.config, -3, 3));
    EXPECT_EQ(out.config.total_tokens(), sum(loads));
  }
}

TEST(SplitVirtual, TwoNodePathWithMatchingPorts) {
  const auto g = build_path(2);
  ASSERT_EQ(g.port(0, 1).remote_port, 1);
  const auto vs = split_virtual(g);
  // (u1,1)-(v2,2) and (u2,2)-(v1,1)
  EXPECT_EQ(vs.ports[0][0][0]->first, (VirtualNode{1, 2}));
  EXPECT_EQ(vs.ports[0][0][0]->second, 2);
  EXPECT_EQ(vs.ports[0][1][1]->first, (VirtualNode{1, 1}));
  EXPECT_EQ(vs.ports[0][1][1]->second, 1);
  ASSERT_EQ(vs.components.size(), 2u);
  for (const auto& comp : vs.components) {
    EXPECT_FALSE(comp.cycle);
    EXPECT_EQ(comp.nodes.size(), 2u);
  }
}

TEST(SplitVirtual, ConsistentPathGivesTwoPaths) {
  const auto vs = split_virtual(build_path(5));
  ASSERT_EQ(vs.components.size(), 2u);
  for (const auto& comp : vs.components) {
    EXPECT_FALSE(comp.cycle);
    EXPECT_EQ(comp.nodes.size(), 5u);
  }
}

TEST(SplitVirtual, CyclesGiveOneLongOrTwoShortCycles) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 3 + seed % 6;
    const auto g = seed == 0 ? build_cycle(4) : build_cycle(n, PortScheme::adversarial(seed));
    const auto vs = split_virtual(g);
    std::vector<std::size_t> sizes;
    for (const auto& comp : vs.components) {
      EXPECT_TRUE(comp.cycle);
      sizes.push_back(comp.nodes.size());
    }
    const std::size_t real = g.node_count();
    EXPECT_TRUE(sizes == std::vector<std::size_t>{2 * real} ||
                sizes == (std::vector<std::size_t>{real, real}));
    // Consecutive virtual nodes are joined by real edges.
    for (const auto& comp : vs.components) {
      for (std::size_t i = 0; i < comp.nodes.size(); ++i) {
        const auto a = comp.nodes[i].real, b = comp.nodes[(i + 1) % comp.nodes.size()].real;
        EXPECT_TRUE(g.edge_between(a, b).has_value());
      }
    }
  }
}

TEST(SplitVirtual, RejectsHighDegree) {
  try {
    split_virtual(build_double_tree(3, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupportedTopology);
  }
}

TEST(FinalFix, HappyInputUnchanged) {
  const auto g = build_path(5);
  const std::vector<int> y = {1, 2, 2, 3, 2};
  const auto out = final_fix(g, y);
  EXPECT_EQ(out.loads, y);
  EXPECT_TRUE(out.moves.empty());
}

TEST(FinalFix, SingleUnhappyEdge) {
  const auto g = build_path(4);
  const auto out = final_fix(g, {4, 4, 2, 2});
  EXPECT_EQ(out.loads, (std::vector<int>{4, 3, 3, 2}));
}

TEST(FinalFix, ExhaustiveSmallPatterns) {
  // Every load vector on a 6-node path (and cycle) with values in 0..4 that
  // meets the precondition ends fully happy with per-node change <= 1.
  for (bool cycle : {false, true}) {
    const auto g = cycle ? build_cycle(6, PortScheme::adversarial(3))
                         : build_path(6, PortScheme::adversarial(3));
    std::vector<int> y(6, 0);
    std::size_t checked = 0;
    for (int code = 0; code < 15625; ++code) {
      int c = code;
      for (auto& v : y) {
        v = c % 5;
        c /= 5;
      }
      bool ok = true;
      for (NodeId v = 0; v < 6 && ok; ++v) {
        const auto dist = bfs_distances(g, v, 3);
        for (NodeId u = 0; u < 6; ++u) {
          if (dist[u] != kUnreachable && std::abs(y[u] - y[v]) > 2) ok = false;
        }
      }
      if (!ok) {
        EXPECT_THROW(final_fix(g, y), Error);
        continue;
      }
      const auto out = final_fix(g, y);
      ++checked;
      EXPECT_EQ(sum(out.loads), sum(y));
      for (NodeId v = 0; v < 6; ++v) EXPECT_LE(std::abs(out.loads[v] - y[v]), 1);
    }
    EXPECT_GT(checked, 100u);
  }
}

TEST(FinalFix, DetectsPreconditionViolation) {
  try {
    final_fix(build_path(3), {0, 2, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPreconditionViolation);
  }
}

TEST(A3, ConstantInputHasZeroFlow) {
  const auto g = build_path(50, PortScheme::adversarial(1)).with_loads(std::vector<int>(50, 3), 4);
  const auto r = run_a3(g);
  for (auto y : r.outputs) EXPECT_EQ(y, 3);
  for (EdgeId e = 0; e < r.flow.size(); ++e) EXPECT_EQ(r.flow.stored(e), 0);
}

TEST(A3, StepInputFeasible) {
  const auto g = step_load(build_path(500), 249, 16);
  const auto r = run_a3(g);
  expect_happy(g, r.outputs);
  const auto in = r.flow.inflow(g);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    EXPECT_EQ(g.load(v) + in[v], r.outputs[v]);
    EXPECT_GE(r.outputs[v], 0);
    EXPECT_LE(r.outputs[v], 16);
  }
  EXPECT_EQ(r.transcript.replay(g.edge_count()), r.flow);
}

TEST(A3, AdversarialRandomFeasibleWithinLinearRounds) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    for (bool cycle : {false, true}) {
      const auto base = cycle ? build_cycle(1000, PortScheme::adversarial(seed))
                              : build_path(1000, PortScheme::adversarial(seed));
      const auto g = random_load(base, 32, seed + 100);
      const auto r = run_a3(g);
      expect_happy(g, r.outputs);
      const auto in = r.flow.inflow(g);
      for (NodeId v = 0; v < g.node_count(); ++v) EXPECT_EQ(g.load(v) + in[v], r.outputs[v]);
      EXPECT_LE(r.rounds, 100u * 32u);
    }
  }
}

TEST(A3, SingleNodeAndEmptyLoad) {
  const auto one = build_path(1).with_loads({5}, 5);
  EXPECT_EQ(run_a3(one).outputs, (std::vector<long long>{5}));
  const auto zero = build_cycle(7);
  const auto r = run_a3(zero);
  for (auto y : r.outputs) EXPECT_EQ(y, 0);
}

}  // namespace
}  // namespace locbal
