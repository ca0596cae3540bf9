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

#include "locbal/baselines.hpp"

#include "gtest/gtest.h"

namespace locbal {
namespace {

using Q = Rational;

template <class Num>
void expect_feasible(const LoadedGraph& g, const BalancingResult<Num>& r) {
  const auto in = r.flow.inflow(g);
  for (NodeId v = 0; v < g.node_count(); ++v) EXPECT_EQ(Num(g.load(v)) + in[v], r.outputs[v]);
  for (const auto& [a, b] : g.edges()) EXPECT_LE(abs_value(Num(r.outputs[a] - r.outputs[b])), Num(1));
  EXPECT_EQ(r.transcript.replay(g.edge_count()), r.flow);
}

bool is_monotone(const std::vector<long long>& y) {
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (y[i] < y[i + 1]) return false;
  }
  return true;
}

TEST(Oracle, SingleMove) {
  const auto g = build_path(2).with_loads({2, 0}, 2);
  const auto r = centralized_oracle(g);
  EXPECT_EQ(r.outputs, (std::vector<long long>{1, 1}));
  EXPECT_EQ(r.rounds, 1u);
  expect_feasible(g, r);
}

TEST(Oracle, ThreeNodes) {
  const auto g = build_path(3).with_loads({4, 0, 0}, 4);
  const auto r = centralized_oracle(g);
  expect_feasible(g, r);
  EXPECT_EQ(r.outputs[0] + r.outputs[1] + r.outputs[2], 4);
}

TEST(Oracle, HappyInputIsIdentity) {
  const auto g = build_cycle(6).with_loads({3, 2, 2, 1, 2, 3}, 3);
  const auto r = centralized_oracle(g);
  EXPECT_EQ(r.rounds, 0u);
  EXPECT_EQ(r.outputs, (std::vector<long long>{3, 2, 2, 1, 2, 3}));
}

TEST(Oracle, RandomGraphsWithinPotentialBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_load(build_random_graph(40, 4, seed, 20), 9, seed);
    const auto r = centralized_oracle(g);
    expect_feasible(g, r);
    long long potential = 0;
    for (int x : g.loads()) potential += static_cast<long long>(x) * x;
    EXPECT_LE(static_cast<long long>(r.rounds), potential / 2);
  }
}

// y(v) as the plain window mean over positions v - L .. v + L mod m.
std::vector<Q> window_mean(const std::vector<int>& x, int L) {
  const auto m = static_cast<long long>(x.size());
  std::vector<Q> y(x.size(), Q(0));
  for (long long v = 0; v < m; ++v) {
    for (long long k = -L; k <= L; ++k) y[v] += Q(x[((v + k) % m + m) % m], 2 * L + 1);
  }
  return y;
}

TEST(MovingAverage, ConstantCycle) {
  const auto g = build_cycle(9).with_loads(std::vector<int>(9, 4), 4);
  const auto r = moving_average(g);
  for (const Q& y : r.outputs) EXPECT_EQ(y, Q(4));
  EXPECT_EQ(r.rounds, 4u);
}

TEST(MovingAverage, MatchesWindowMeanOnCycles) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t m = 3 + seed * 5;
    const int L = 1 + static_cast<int>(seed % 7);
    const auto g = random_load(build_cycle(m), L, seed);
    const auto r = moving_average(g);
    expect_feasible(g, r);
    EXPECT_EQ(r.outputs, window_mean(g.loads(), L)) << m << " " << L;
    for (const auto& [a, b] : g.edges()) {
      EXPECT_LE(abs_value(Q(r.outputs[a] - r.outputs[b])), Q(L, 2 * L + 1));
    }
  }
}

TEST(MovingAverage, SlidingMeanOfThree) {
  const auto g = build_cycle(6).with_loads({3, 0, 0, 3, 0, 0}, 3);
  const auto r = moving_average(g, 1);
  for (const Q& y : r.outputs) EXPECT_EQ(y, Q(1));
  const auto h = build_cycle(5).with_loads({1, 0, 0, 0, 0}, 1);
  EXPECT_EQ(moving_average(h).outputs, (std::vector<Q>{Q(1, 3), Q(1, 3), Q(0), Q(0), Q(1, 3)}));
}

TEST(MovingAverage, StepGapIsExtremal) {
  for (int L : {2, 5, 8}) {
    const auto g = step_load(build_cycle(200), 99, L);
    const auto r = moving_average(g);
    Q worst(0);
    for (const auto& [a, b] : g.edges()) worst = std::max(worst, abs_value(Q(r.outputs[a] - r.outputs[b])));
    EXPECT_EQ(worst, Q(L, 2 * L + 1));
  }
}

TEST(MovingAverage, PathsReflectAtEnds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 2 + seed * 3;
    const int L = 1 + static_cast<int>(seed % 5);
    const auto g = random_load(build_path(n), L, seed + 9);
    const auto r = moving_average(g);
    expect_feasible(g, r);
    std::vector<int> mirrored = g.loads();
    for (std::size_t i = n; i-- > 0;) mirrored.push_back(g.load(i));
    const auto full = window_mean(mirrored, L);
    for (NodeId v = 0; v < n; ++v) EXPECT_EQ(r.outputs[v], full[v]);
  }
}

TEST(MovingAverage, RejectsTrees) {
  EXPECT_THROW(moving_average(build_double_tree(3, 4)), Error);
}

TEST(MatchAndBalance, TwoNodes) {
  const auto g = build_path(2).with_loads({2, 0}, 2);
  for (auto policy : {MatcherPolicy::kEdgeId, MatcherPolicy::kLargestGap}) {
    const auto run = match_and_balance(g, {.policy = policy});
    EXPECT_EQ(run.result.rounds, 1u);
    EXPECT_EQ(run.result.outputs, (std::vector<long long>{1, 1}));
  }
}

TEST(MatchAndBalance, StepStaysMonotoneWithBoundedWork) {
  for (int L : {4, 8, 16}) {
    for (auto policy : {MatcherPolicy::kEdgeId, MatcherPolicy::kLargestGap}) {
      const auto g = step_load(build_path(8 * L), 4 * L - 1, L, StepOrientation::kHighThenLow);
      std::size_t checked = 0;
      MatchAndBalanceOptions options{.policy = policy};
      options.observer = [&](std::size_t, const std::vector<long long>& y) {
        EXPECT_TRUE(is_monotone(y));
        ++checked;
      };
      const auto run = match_and_balance(g, options);
      expect_feasible(g, run.result);
      EXPECT_EQ(checked, run.result.rounds);
      for (long long w : run.round_work) EXPECT_LE(2 * w, L);
    }
  }
}

TEST(MatchAndBalance, TetrahedralWorkAndQuadraticRounds) {
  const int L = 16;
  const long long h = L / 2;
  const auto g = step_load(build_path(8 * L), 4 * L - 1, L, StepOrientation::kHighThenLow);
  for (auto policy : {MatcherPolicy::kEdgeId, MatcherPolicy::kLargestGap}) {
    const auto run = match_and_balance(g, {.policy = policy});
    const auto report = work_report(g, run.result.transcript);
    EXPECT_GE(report.total, tetrahedral(h));
    EXPECT_EQ(report.total, work_accounting(run.result.transcript));
    EXPECT_GE(24 * run.result.rounds, static_cast<std::size_t>(L * L));
  }
}

TEST(MatchAndBalance, BudgetCarriesPartial) {
  const auto g = step_load(build_path(64), 31, 8, StepOrientation::kHighThenLow);
  try {
    match_and_balance(g, {.max_rounds = 3});
    FAIL();
  } catch (const BudgetExceeded<long long>& e) {
    EXPECT_EQ(e.partial().rounds, 3u);
    EXPECT_FALSE(e.partial().completed);
  }
}

TEST(Work, EmptyAndSingleUnit) {
  Transcript<long long> t;
  EXPECT_EQ(work_accounting(t), 0);
  t.record(1, 0, -1);
  EXPECT_EQ(work_accounting(t), 1);
  const auto g = build_path(2);
  const auto report = work_report(g, t);
  EXPECT_EQ(report.sent_by_node, (std::vector<long long>{0, 1}));
}

TEST(Tetrahedral, FirstValues) {
  EXPECT_EQ(tetrahedral(1), 1);
  EXPECT_EQ(tetrahedral(4), 20);
  EXPECT_EQ(tetrahedral(8), 120);
}

TEST(Oblivious, ZeroKernel) {
  const auto r = oblivious_gap({3, 12, {}});
  EXPECT_EQ(r.alpha, Q(0));
  EXPECT_EQ(r.beta, Q(12));
  EXPECT_EQ(r.gap, Q(12));
}

TEST(Oblivious, RandomKernelsMeetTheBound) {
  SplitMix64 rng(5);
  for (int d : {3, 4, 5}) {
    for (int trial = 0; trial < 50; ++trial) {
      const int L = 4 + static_cast<int>(rng.below(20));
      const auto k = random_kernel(d, L, 1 + rng.below(4), rng);
      const auto r = oblivious_gap(k);
      EXPECT_GE(Q(d) * r.gap, Q((d - 2) * L));
      EXPECT_EQ(r.gap, oblivious_gap_by_tree(k));
    }
  }
}

TEST(Oblivious, TightKernelHitsTheBound) {
  SplitMix64 rng(6);
  for (int d : {3, 4, 5}) {
    const auto k = random_kernel(d, 12, 3, rng, true);
    const auto r = oblivious_gap(k);
    EXPECT_EQ(r.alpha, Q(12, d));
    EXPECT_EQ(r.beta, Q(0));
    EXPECT_EQ(r.gap, Q((d - 2) * 12, d));
    EXPECT_EQ(r.gap, oblivious_gap_by_tree(k));
  }
}

TEST(Oblivious, OvershippingIsInfeasible) {
  try {
    oblivious_gap({3, 6, {Q(1), Q(1)}});  // alpha = 3, d alpha = 9 > 6
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleKernel);
  }
}

}  // namespace
}  // namespace locbal
