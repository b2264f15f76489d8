#include <gtest/gtest.h>

#include "test_support.hpp"

namespace tempmine {
namespace {

using testing::graph_of;

// Hinted plan, run through the kernel path.
std::vector<Count> hinted(const TemporalGraph& g, const ValidatedPattern& p, Timestamp delta) {
  CompileOptions o;
  o.delta_override = delta;
  const auto plan = compile(p, g.stats(), o);
  EXPECT_NE(plan.kernel.hint, KernelHint::Generic) << p.spec().name;
  KernelScratch s(g.node_count());
  std::vector<Count> out;
  for (EdgeId e = 0; e < g.edge_count(); ++e) out.push_back(run_kernel(plan, g, e, s));
  return out;
}

TEST(Fan, StarCountsOtherSources) {
  // Five sources pay the hub (node 5) at t=1..5.
  const auto g = graph_of({{0, 5, 1}, {1, 5, 2}, {2, 5, 3}, {3, 5, 4}, {4, 5, 5}});
  EXPECT_EQ(count_fan(g, 4, Direction::In, 10), 4);
  EXPECT_EQ(count_fan(g, 4, Direction::Out, 10), 0);
  EXPECT_EQ(count_fan(g, 0, Direction::In, 10), 0);
  EXPECT_EQ(count_fan(g, 4, Direction::In, 1), 1);
}

TEST(Fan, IsolatedEdge) {
  const auto g = graph_of({{0, 1, 3}});
  EXPECT_EQ(count_fan(g, 0, Direction::In, 10), 0);
  EXPECT_EQ(count_fan(g, 0, Direction::Out, 10), 0);
}

TEST(Degree, SingleEdge) {
  const auto g = graph_of({{0, 1, 7}});
  EXPECT_EQ(count_degree(g, 0, 10), (std::array<Count, 4>{0, 1, 1, 0}));
}

TEST(Degree, ReturnEdgeRaisesInDegreeOfSource) {
  const auto g = graph_of({{1, 0, 3}, {0, 1, 7}});
  EXPECT_GE(count_degree(g, 1, 10)[0], 1);
  EXPECT_EQ(count_degree(g, 1, 3)[0], 0);
}

TEST(Cycle, FourCycleAnchoredOnLastEdge) {
  const auto g = graph_of({{0, 1, 1}, {1, 2, 2}, {2, 3, 3}, {3, 0, 4}});
  KernelScratch s(4);
  EXPECT_EQ(count_cycles(g, 3, 10, 4, false, false, s), 1);
  EXPECT_EQ(count_cycles(g, 0, 10, 4, false, false, s), 0);
  EXPECT_EQ(count_cycles(g, 3, 10, 4, true, false, s), 1);
  EXPECT_EQ(count_cycles(g, 3, 2, 4, false, false, s), 0);
}

TEST(Cycle, TwoCycle) {
  const auto g = graph_of({{0, 1, 1}, {1, 0, 2}});
  KernelScratch s(2);
  EXPECT_EQ(count_cycles(g, 1, 5, 2, false, false, s), 1);
  EXPECT_EQ(count_cycles(g, 0, 5, 2, false, false, s), 0);
}

TEST(Cycle, OrderedTriangleNeedsIncreasingTimes) {
  // 0->1 trigger @5; 1->2 @3 then 2->0 @4 is time-respecting; 1->3 @4, 3->0 @2 is not.
  const auto g = graph_of({{0, 1, 5}, {1, 2, 3}, {2, 0, 4}, {1, 3, 4}, {3, 0, 2}});
  KernelScratch s(4);
  EXPECT_EQ(count_cycles(g, 0, 10, 3, false, false, s), 2);
  EXPECT_EQ(count_cycles(g, 0, 10, 3, true, false, s), 1);
}

TEST(ScatterGather, PlantedFiveNodeGraph) {
  // s=0 -> m1..m3 (1,2,3) at t=1..3; m_i -> d=4 at t=4..6.
  const auto g = graph_of({{0, 1, 1}, {0, 2, 2}, {0, 3, 3}, {1, 4, 4}, {2, 4, 5}, {3, 4, 6}});
  KernelScratch s(5);
  EXPECT_EQ(count_scatter_gather(g, 5, 10, 2, false, s), 1);
  EXPECT_EQ(count_scatter_gather(g, 5, 10, 4, false, s), 0);
  EXPECT_EQ(count_scatter_gather(g, 5, 10, 3, false, s), 1);
  EXPECT_EQ(count_scatter_gather(g, 3, 10, 2, false, s), 0);
  EXPECT_EQ(count_scatter_gather(g, 5, 10, 3, true, s), 1);
}

TEST(Stack, OneNodeEachSide) {
  // a=0 -> u=1 @2, u -> v=2 @4 (trigger), v -> c=3 @3; times doubled to stay integral.
  const auto g = graph_of({{0, 1, 2}, {1, 2, 4}, {2, 3, 3}});
  KernelScratch s(4);
  EXPECT_EQ(count_stack(g, 1, 10, false, 1, s), 1);
  EXPECT_EQ(count_stack(g, 0, 10, false, 1, s), 0);
  EXPECT_EQ(count_stack(g, 1, 10, true, 1, s), 0);  // v->c precedes the trigger
}

TEST(Kernels, MatchOracleOnRandomGraphs) {
  std::mt19937_64 rng(1234);
  std::vector<ValidatedPattern> patterns = load_builtins();
  patterns.push_back(testing::with_min_size(load_builtin("sg_count"), 1));
  patterns.push_back(testing::with_min_size(load_builtin("sg_count"), 3));
  for (const char* f : {"cycle_4_renamed.pat", "sg_ordered.pat", "cycle_3_ordered.pat", "cycle_3_edges.pat",
                        "stack_ordered.pat"}) {
    patterns.push_back(testing::example_pattern(f));
  }
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testing::random_graph(rng, 12 + static_cast<NodeId>(rng() % 25), 60 + rng() % 200, 300);
    const Timestamp delta = 10 + static_cast<Timestamp>(rng() % 120);
    for (const auto& p : patterns) {
      ASSERT_EQ(hinted(g, p, delta), testing::oracle_counts(g, p, delta))
          << p.spec().name << " trial " << trial << " delta " << delta;
    }
  }
}

TEST(Kernels, GenericPlanRejected) {
  const auto g = graph_of({{0, 1, 1}});
  CompileOptions o;
  o.force_generic = true;
  const auto plan = compile(load_builtin("fan_in"), std::nullopt, o);
  KernelScratch s(2);
  EXPECT_THROW(run_kernel(plan, g, 0, s), InvariantError);
}

}  // namespace
}  // namespace tempmine
