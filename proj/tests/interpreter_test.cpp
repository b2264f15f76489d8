#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"

namespace tempmine {
namespace {

using testing::graph_of;

// Runs the first cell of a one-stage pattern for trigger e.
NodeSet first_cell(const std::string& stage, const TemporalGraph& g, EdgeId e, Timestamp delta) {
  const auto p = testing::pattern_of("pattern: one\ndelta: " + std::to_string(delta) + "\nstages:\n" + stage +
                                     "emit:\n  mode: set_cardinality\n  target: X\n");
  const auto plan = compile(p, g.stats());
  Bindings b;
  b.reset(plan, g, e);
  Scratch s(g.node_count());
  NodeSet out;
  execute_cell(plan.cells[0], plan, b, g, s, out);
  return out;
}

TEST(ExecuteCell, ForAllWindowAndSkip) {
  // Trigger 0->1 @10; in-edges of N0 at 9 (from N1), 7, 6, 2, 1; delta 5.
  const auto g = graph_of({{0, 1, 10}, {1, 0, 9}, {2, 0, 7}, {3, 0, 6}, {4, 0, 2}, {5, 0, 1}});
  const auto unfiltered = first_cell("  - op: for_all\n    src: N0.in_neigh\n    dst_var: X\n", g, 0, 5);
  EXPECT_EQ(unfiltered.nodes, (std::vector<NodeId>{1, 2, 3}));
  const auto out =
      first_cell("  - op: for_all\n    src: N0.in_neigh\n    dst_var: X\n    skip_if: X == N1\n", g, 0, 5);
  EXPECT_EQ(out.nodes, (std::vector<NodeId>{2, 3}));
  EXPECT_EQ(out.hit(0, 0).rep, 2u);
  EXPECT_EQ(out.hit(0, 0).t, 7);
}

TEST(ExecuteCell, IntersectOfTwoLists) {
  // m=0, d=1, x=2, y=3, z=4, w=5; trigger m->d.
  const auto g =
      graph_of({{0, 2, 1}, {0, 3, 1}, {0, 4, 1}, {3, 1, 2}, {4, 1, 2}, {5, 1, 2}, {0, 1, 3}});
  const auto out = first_cell("  - op: intersect\n    src: N0.out_neigh, N1.in_neigh\n    dst_var: X\n", g, 6, 10);
  EXPECT_EQ(out.nodes, (std::vector<NodeId>{3, 4}));
  ASSERT_EQ(out.role_count, 2);
  EXPECT_EQ(out.hit(0, 0).rep, 1u);  // 0->3
  EXPECT_EQ(out.hit(0, 1).rep, 3u);  // 3->1
}

TEST(ExecuteCell, DifferentiateDropsN1) {
  // Trigger 0->1; N0 also paid a=2 and b=3.
  const auto g = graph_of({{0, 2, 1}, {0, 3, 2}, {0, 1, 3}});
  const auto out =
      first_cell("  - op: differentiate\n    src: N0.out_neigh\n    dst_var: X\n    skip_if: X == N1\n", g, 2, 10);
  EXPECT_EQ(out.nodes, (std::vector<NodeId>{2, 3}));
}

TEST(ExecuteCell, RepresentativeAndMultiplicity) {
  // Three parallel edges 2->0 at 4, 6, 6 (ids 1, 2, 3); trigger 0->1 @8.
  const auto g = graph_of({{0, 1, 8}, {2, 0, 4}, {2, 0, 6}, {2, 0, 6}});
  const auto back = first_cell("  - op: for_all\n    src: N0.in_neigh\n    dst_var: X\n", g, 0, 10);
  ASSERT_EQ(back.nodes, (std::vector<NodeId>{2}));
  EXPECT_EQ(back.hit(0, 0).rep, 2u);  // latest time, lowest id among ties
  EXPECT_EQ(back.hit(0, 0).mult, 3u);

  // Forward window keeps the earliest edge.
  const auto g2 = graph_of({{0, 1, 1}, {0, 2, 4}, {0, 2, 3}, {0, 2, 9}});
  const auto fwd = first_cell("  - op: for_all\n    src: N0.out_neigh\n    dst_var: X\n    window: forward\n", g2, 0, 5);
  ASSERT_EQ(fwd.nodes, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(fwd.hit(1, 0).rep, 2u);
  EXPECT_EQ(fwd.hit(1, 0).mult, 2u);
}

TEST(ExecuteCell, SelfLoopsNeverQualify) {
  const auto g = graph_of({{0, 1, 5}, {0, 0, 4}});
  const auto out = first_cell("  - op: for_all\n    src: N0.out_neigh\n    dst_var: X\n", g, 0, 10);
  EXPECT_EQ(out.nodes, (std::vector<NodeId>{1}));
}

TEST(ExecuteCell, BreakBoundsTrimWindow) {
  const auto g = graph_of({{0, 1, 10}, {0, 2, 7}, {0, 3, 10}, {0, 4, 9}});
  const auto strict =
      first_cell("  - op: for_all\n    src: N0.out_neigh\n    dst_var: X\n    break_if: e.t >= t\n", g, 0, 10);
  EXPECT_EQ(strict.nodes, (std::vector<NodeId>{2, 4}));
  const auto loose =
      first_cell("  - op: for_all\n    src: N0.out_neigh\n    dst_var: X\n    break_if: e.t > t\n", g, 0, 10);
  EXPECT_EQ(loose.nodes, (std::vector<NodeId>{1, 2, 3, 4}));
}

TEST(IntersectSorted, Examples) {
  EXPECT_EQ(intersect_sorted(std::vector<NodeId>{1, 3, 5}, std::vector<NodeId>{3, 5, 9}),
            (std::vector<NodeId>{3, 5}));
  EXPECT_TRUE(intersect_sorted(std::vector<NodeId>{1, 2}, std::vector<NodeId>{3, 4}).empty());
  EXPECT_TRUE(intersect_sorted(std::vector<NodeId>{}, std::vector<NodeId>{3, 4}).empty());
}

TEST(IntersectSorted, MatchesNestedLoop) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    // Mix balanced and very lopsided sizes to exercise both strategies.
    const std::size_t na = 1 + rng() % (trial % 2 ? 4 : 60);
    const std::size_t nb = 1 + rng() % 400;
    std::set<NodeId> sa, sb;
    while (sa.size() < na) sa.insert(static_cast<NodeId>(rng() % 500));
    while (sb.size() < nb) sb.insert(static_cast<NodeId>(rng() % 500));
    const std::vector<NodeId> a(sa.begin(), sa.end()), b(sb.begin(), sb.end());
    std::vector<NodeId> naive;
    for (NodeId x : a) {
      for (NodeId y : b) {
        if (x == y) naive.push_back(x);
      }
    }
    ASSERT_EQ(intersect_sorted(a, b), naive);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> idx;
    intersect_sorted(b, a, idx);
    ASSERT_EQ(idx.size(), naive.size());
    for (const auto& [i, j] : idx) ASSERT_EQ(b[i], a[j]);
  }
}

}  // namespace
}  // namespace tempmine
