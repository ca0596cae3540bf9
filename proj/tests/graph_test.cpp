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

#include "locbal/graph.hpp"

#include <set>
#include <sstream>

#include "gtest/gtest.h"

namespace locbal {
namespace {

TEST(BuildPath, SingleNodeHasNoEdges) {
  const auto g = build_path(1);
  EXPECT_EQ(g.node_count(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(g.degree(0), 0u);
}

TEST(BuildPath, ConsistentPortsPointLeftThenRight) {
  const auto g = build_path(3);
  ASSERT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.edges()[0], (std::pair<NodeId, NodeId>(0, 1)));
  EXPECT_EQ(g.edges()[1], (std::pair<NodeId, NodeId>(1, 2)));
  EXPECT_EQ(g.port(1, 1).neighbor, 0u);
  EXPECT_EQ(g.port(1, 2).neighbor, 2u);
}

TEST(BuildPath, ZeroNodesIsInvalidSize) {
  try {
    build_path(0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidSize);
  }
}

TEST(BuildPath, AdversarialKeepsEdgesButChangesPorts) {
  const auto consistent = build_path(100);
  const auto adversarial = build_path(100, PortScheme::adversarial(7));
  EXPECT_EQ(consistent.edges(), adversarial.edges());
  EXPECT_TRUE(adversarial.validate().empty());
  bool differs = false;
  for (NodeId v = 0; v < 100; ++v) {
    if (consistent.ports(v) != adversarial.ports(v)) differs = true;
  }
  EXPECT_TRUE(differs);
}

TEST(BuildCycle, Triangle) {
  const auto g = build_cycle(3);
  EXPECT_EQ(g.edge_count(), 3u);
  for (NodeId v = 0; v < 3; ++v) EXPECT_EQ(g.degree(v), 2u);
}

TEST(BuildCycle, FollowingPortTwoVisitsEveryNode) {
  const auto g = build_cycle(4);
  std::set<NodeId> seen;
  NodeId v = 0;
  for (int step = 0; step < 4; ++step) {
    seen.insert(v);
    v = g.port(v, 2).neighbor;
  }
  EXPECT_EQ(v, 0u);
  EXPECT_EQ(seen.size(), 4u);
}

TEST(BuildCycle, AdversarialPassesValidator) {
  EXPECT_TRUE(build_cycle(5, PortScheme::adversarial(1)).validate().empty());
}

TEST(BuildCycle, TooSmallIsInvalidSize) {
  EXPECT_THROW(build_cycle(2), Error);
}

TEST(DoubleTree, DepthOneGadget) {
  const auto g = build_double_tree(3, 4);
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.loads(), (std::vector<int>{0, 0, 0, 4, 4, 4}));
  ASSERT_TRUE(g.bridge().has_value());
  EXPECT_EQ(*g.bridge(), (std::pair<NodeId, NodeId>(0, 3)));
  EXPECT_EQ(g.degree(0), 3u);
  EXPECT_EQ(g.degree(3), 3u);
}

TEST(DoubleTree, NodeCountMatchesGeometricSum) {
  EXPECT_EQ(build_double_tree(3, 8).node_count(), 14u);
  EXPECT_EQ(build_double_tree(4, 8).node_count(), 26u);
  for (int d = 3; d <= 5; ++d) {
    for (int big_l = 4; big_l <= 16; big_l += 4) {
      std::size_t side = 0, power = 1;
      for (int k = 0; k <= big_l / 4; ++k, power *= static_cast<std::size_t>(d - 1)) side += power;
      const auto g = build_double_tree(d, big_l);
      EXPECT_EQ(g.node_count(), 2 * side) << "d=" << d << " L=" << big_l;
      EXPECT_TRUE(g.validate().empty());
      EXPECT_LE(static_cast<int>(g.degree(5 % g.node_count())), d);
    }
  }
}

TEST(DoubleTree, RejectsLNotMultipleOfFour) {
  try {
    build_double_tree(3, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidParameter);
  }
}

TEST(StepLoad, LowThenHigh) {
  const auto g = step_load(build_path(4), 1, 2);
  EXPECT_EQ(g.loads(), (std::vector<int>{0, 0, 2, 2}));
}

TEST(StepLoad, LastSplitIsAllLow) {
  const auto g = step_load(build_path(4), 3, 2);
  EXPECT_EQ(g.loads(), (std::vector<int>{0, 0, 0, 0}));
}

TEST(StepLoad, Mirrored) {
  const auto g = step_load(build_path(5), 2, 4, StepOrientation::kHighThenLow);
  EXPECT_EQ(g.loads(), (std::vector<int>{4, 4, 4, 0, 0}));
}

TEST(StepLoad, ConservesStatedTotal) {
  for (std::size_t m = 0; m < 20; ++m) {
    const auto g = step_load(build_cycle(20), m, 7);
    EXPECT_EQ(g.total_load(), 7 * static_cast<long long>(20 - m - 1));
  }
}

TEST(StepLoad, SplitOutOfRange) {
  EXPECT_THROW(step_load(build_path(4), 4, 2), Error);
}

TEST(RandomLoad, Deterministic) {
  const auto base = build_path(50);
  EXPECT_EQ(random_load(base, 9, 3).loads(), random_load(base, 9, 3).loads());
  EXPECT_NE(random_load(base, 9, 3).loads(), random_load(base, 9, 4).loads());
}

TEST(RandomLoad, ZeroMaximumGivesZeros) {
  const auto g = random_load(build_path(10), 0, 5);
  EXPECT_EQ(g.total_load(), 0);
}

TEST(RandomLoad, LargeInstanceInRange) {
  const auto g = random_load(build_path(10000), 32, 42);
  EXPECT_TRUE(g.validate().empty());
  int lo = 32, hi = 0;
  for (int x : g.loads()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  EXPECT_EQ(lo, 0);
  EXPECT_EQ(hi, 32);
}

TEST(Distance, Basics) {
  const auto g = build_path(3);
  EXPECT_EQ(distance(g, 1, 1), 0u);
  EXPECT_EQ(distance(g, 0, 2), 2u);
  EXPECT_THROW(distance(g, 0, 3), Error);
}

TEST(Distance, DoubleTreeRootToFarLeaf) {
  const auto g = build_double_tree(3, 8);
  // Deepest leaf of the full side is the last node.
  EXPECT_EQ(distance(g, 0, g.node_count() - 1), 3u);
}

TEST(Distance, DisconnectedIsInfinite) {
  LoadedGraph::RawAdjacency adj(2);
  const LoadedGraph g(adj, {0, 0}, 1, 1, Topology::kGeneral);
  EXPECT_FALSE(distance(g, 0, 1).has_value());
}

TEST(Distance, TriangleInequalityOnGeneratedGraphs) {
  std::vector<LoadedGraph> graphs = {build_path(40, PortScheme::adversarial(2)),
                                     build_cycle(33), build_double_tree(3, 12),
                                     build_random_graph(50, 3, 11, 30)};
  SplitMix64 rng(99);
  for (const auto& g : graphs) {
    EXPECT_TRUE(g.validate().empty());
    for (int trial = 0; trial < 100; ++trial) {
      const NodeId a = rng.below(g.node_count()), b = rng.below(g.node_count()),
                   c = rng.below(g.node_count());
      EXPECT_LE(*distance(g, a, c), *distance(g, a, b) + *distance(g, b, c));
    }
  }
}

TEST(RandomGraph, RespectsDegreeBoundAndIsConnected) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = build_random_graph(50, 3, seed, 40);
    EXPECT_TRUE(g.validate().empty());
    const auto dist = bfs_distances(g, 0);
    for (auto d : dist) EXPECT_NE(d, kUnreachable);
  }
}

TEST(LoadedGraph, RejectsAsymmetricPorts) {
  LoadedGraph::RawAdjacency adj = {{{1, 1}}, {{0, 2}}};
  EXPECT_THROW(LoadedGraph(adj, {0, 0}, 1, 2, Topology::kGeneral), Error);
}

TEST(LoadedGraph, RejectsSelfLoopAndParallelEdges) {
  LoadedGraph::RawAdjacency loop = {{{0, 1}}};
  EXPECT_THROW(LoadedGraph(loop, {0}, 1, 2, Topology::kGeneral), Error);
  LoadedGraph::RawAdjacency parallel = {{{1, 1}, {1, 2}}, {{0, 1}, {0, 2}}};
  EXPECT_THROW(LoadedGraph(parallel, {0, 0}, 1, 2, Topology::kGeneral), Error);
}

TEST(InstanceFile, RoundTripIsIdentity) {
  std::vector<LoadedGraph> graphs = {
      random_load(build_path(100, PortScheme::adversarial(5)), 8, 1),
      random_load(build_cycle(17, PortScheme::adversarial(3)), 4, 2), build_double_tree(3, 8),
      random_load(build_random_graph(30, 3, 4, 20), 6, 9), build_path(1)};
  for (const auto& g : graphs) {
    std::stringstream buffer;
    write_instance(buffer, g);
    const auto back = read_instance(buffer);
    EXPECT_EQ(back, g);
  }
}

TEST(InstanceFile, ExactText) {
  std::stringstream buffer;
  write_instance(buffer, step_load(build_path(3), 0, 2));
  EXPECT_EQ(buffer.str(),
            "locbal-instance 1\n"
            "n 3 L 2 delta 2 topology path\n"
            "loads 0 2 2\n"
            "adj 0 1 1:1\n"
            "adj 1 2 0:1 2:1\n"
            "adj 2 1 1:2\n"
            "end\n");
}

TEST(InstanceFile, RejectsGarbage) {
  std::stringstream buffer("not an instance\n");
  EXPECT_THROW(read_instance(buffer), Error);
}

}  // namespace
}  // namespace locbal
