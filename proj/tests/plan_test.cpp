#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"

namespace tempmine {
namespace {

using testing::example_pattern;

TEST(Compile, ScatterGatherPlan) {
  const auto plan = compile(load_builtin("sg_count"));
  ASSERT_EQ(plan.cells.size(), 2u);
  EXPECT_EQ(plan.cells[1].op, StageOp::Intersect);
  EXPECT_EQ(plan.cells[1].src.size(), 2u);
  EXPECT_EQ(plan.kernel.hint, KernelHint::ScatterGather);
  EXPECT_EQ(plan.kernel.params.min_size, 2);
  EXPECT_TRUE(plan.cells[0].scalar_output);
  EXPECT_EQ(plan.loop_roles, (std::vector<int>{1}));
}

TEST(Compile, FourCyclePlanEndsInIntersect) {
  const auto plan = compile(load_builtin("cycle_4"));
  ASSERT_EQ(plan.cells.size(), 2u);
  const auto& last = plan.cells[1];
  EXPECT_EQ(last.op, StageOp::Intersect);
  // N2's out-neighbors with N0's in-neighbors, in some evaluation order.
  std::vector<std::pair<int, Direction>> operands;
  for (const auto& s : last.src) operands.emplace_back(s.var, s.direction);
  std::sort(operands.begin(), operands.end());
  EXPECT_EQ(operands, (std::vector<std::pair<int, Direction>>{{kTriggerSrc, Direction::In},
                                                              {scalar_register(0), Direction::Out}}));
  EXPECT_EQ(hint_name(plan.kernel), "CYCLE_4");
}

TEST(Compile, BuiltinHints) {
  const std::vector<std::pair<std::string, std::string>> want{
      {"fan_in", "FAN"},         {"fan_out", "FAN"},         {"deg_in_src", "DEGREE"},
      {"deg_out_src", "DEGREE"}, {"deg_in_dst", "DEGREE"},   {"deg_out_dst", "DEGREE"},
      {"cycle_2", "CYCLE_2"},    {"cycle_3", "CYCLE_3"},     {"cycle_4", "CYCLE_4"},
      {"sg_count", "SCATTER_GATHER"}, {"stack_count", "STACK"}};
  for (const auto& [name, hint] : want) {
    EXPECT_EQ(hint_name(compile(load_builtin(name)).kernel), hint) << name;
  }
  EXPECT_EQ(compile(load_builtin("fan_in")).kernel.params.direction, Direction::In);
  EXPECT_EQ(compile(load_builtin("fan_out")).kernel.params.direction, Direction::Out);
  const auto d = compile(load_builtin("deg_out_dst")).kernel.params;
  EXPECT_EQ(d.endpoint, Endpoint::Dst);
  EXPECT_EQ(d.direction, Direction::Out);
}

TEST(Compile, RenamedFourCycleStillLowers) {
  EXPECT_EQ(hint_name(compile(example_pattern("cycle_4_renamed.pat")).kernel), "CYCLE_4");
}

TEST(Compile, CustomVariantsLower) {
  const auto sg = compile(example_pattern("sg_ordered.pat")).kernel;
  EXPECT_EQ(sg.hint, KernelHint::ScatterGather);
  EXPECT_TRUE(sg.params.ordered);
  EXPECT_EQ(sg.params.min_size, 3);
  const auto c3 = compile(example_pattern("cycle_3_ordered.pat")).kernel;
  EXPECT_EQ(hint_name(c3), "CYCLE_3");
  EXPECT_TRUE(c3.params.ordered);
  EXPECT_TRUE(compile(example_pattern("cycle_3_edges.pat")).kernel.params.edge_tuples);
  const auto st = compile(example_pattern("stack_ordered.pat")).kernel;
  EXPECT_EQ(st.hint, KernelHint::Stack);
  EXPECT_TRUE(st.params.ordered);
}

TEST(Compile, NovelPatternsStayGeneric) {
  const auto three = compile(example_pattern("cycle_5.pat"));
  EXPECT_EQ(three.kernel.hint, KernelHint::Generic);
  EXPECT_EQ(three.cells.size(), 3u);
  const auto five = compile(example_pattern("chain_5.pat"));
  EXPECT_EQ(five.kernel.hint, KernelHint::Generic);
  EXPECT_EQ(five.cells.size(), 5u);
  EXPECT_EQ(compile(example_pattern("sg_instances.pat")).kernel.hint, KernelHint::Generic);
  EXPECT_EQ(compile(example_pattern("large_fan_in.pat")).kernel.hint, KernelHint::Generic);
}

TEST(Compile, ChangedSemanticsDoNotLower) {
  // Same shape as the 4-cycle but without the N3 == N1 skip.
  const auto p = testing::pattern_of(
      "pattern: near_cycle\ndelta: 10\nstages:\n"
      "  - op: for_all\n    src: N1.out_neigh\n    dst_var: N2\n    skip_if: N2 == N0\n"
      "  - op: intersect\n    src: N2.out_neigh, N0.in_neigh\n    dst_var: N3\n"
      "emit:\n  mode: set_cardinality\n  target: N3\n");
  EXPECT_EQ(compile(p).kernel.hint, KernelHint::Generic);
  // Members attribution keeps the hint; the engine decides whether to use it.
  CompileOptions o;
  o.force_generic = true;
  EXPECT_EQ(compile(load_builtin("cycle_4"), std::nullopt, o).kernel.hint, KernelHint::Generic);
}

TEST(Compile, Overrides) {
  CompileOptions o;
  o.delta_override = 0;
  o.attribution_override = Attribution::Members;
  const auto plan = compile(load_builtin("fan_in"), std::nullopt, o);
  EXPECT_EQ(plan.delta, 0);
  EXPECT_EQ(plan.attribution, Attribution::Members);
  EXPECT_EQ(plan.cells[0].window_lo, 0);
  o.delta_override = -1;
  EXPECT_THROW(compile(load_builtin("fan_in"), std::nullopt, o), ConfigError);
}

TEST(Compile, WindowsAndBreaks) {
  const auto plan = compile(example_pattern("stack_ordered.pat"));
  EXPECT_EQ(plan.cells[0].window_lo, -86400);
  EXPECT_EQ(plan.cells[0].window_hi, 0);
  EXPECT_EQ(plan.cells[1].window_lo, 0);
  EXPECT_EQ(plan.cells[1].window_hi, 86400);
  const auto chain = compile(example_pattern("chain_5.pat"));
  ASSERT_EQ(chain.cells[1].break_preds.size(), 1u);
  EXPECT_EQ(chain.cells[1].break_preds[0], (TimeBound{kAnyRole, 1, 0}));
  const auto strict = compile(testing::pattern_of(
      "pattern: s\ndelta: 10\nstages:\n  - op: for_all\n    src: N0.in_neigh\n    dst_var: A\n"
      "    break_if: e1.t >= t\nemit:\n  mode: set_cardinality\n  target: A\n"));
  EXPECT_EQ(strict.cells[0].break_preds[0], (TimeBound{1, -1, -1}));
}

TEST(Compile, SlotsDenseAndDependenciesRespected) {
  for (const auto& p : load_builtins()) {
    const auto plan = compile(p);
    for (std::size_t i = 0; i < plan.cells.size(); ++i) {
      EXPECT_EQ(plan.cells[i].dst_slot, static_cast<int>(i));
      for (const auto& s : plan.cells[i].src) {
        if (s.kind == OperandRef::Kind::Set) EXPECT_LT(s.var, static_cast<int>(i));
        if (s.kind != OperandRef::Kind::Set) EXPECT_LT(s.var, scalar_register(static_cast<int>(i)));
      }
    }
  }
}

TEST(OrderIntersection, SmallerDriverFirst) {
  OperandRef set;
  set.kind = OperandRef::Kind::Set;
  set.estimate = 3;
  set.index = 1;
  OperandRef adj;
  adj.kind = OperandRef::Kind::Adjacency;
  adj.direction = Direction::In;
  adj.index = 0;
  GraphStats stats;
  stats.mean_in = 40;
  const auto out = order_intersection({adj, set}, stats);
  EXPECT_EQ(out[0].index, 1);
  EXPECT_EQ(out[1].index, 0);
}

TEST(OrderIntersection, StableOnTies) {
  std::vector<OperandRef> ops(4);
  for (int i = 0; i < 4; ++i) {
    ops[static_cast<std::size_t>(i)].index = i;
    ops[static_cast<std::size_t>(i)].estimate = 5;
  }
  const auto out = order_intersection(ops, std::nullopt);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)].index, i);
}

TEST(OrderIntersection, PermutationAndResultInvariant) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<OperandRef> ops(2 + rng() % 4);
    for (std::size_t i = 0; i < ops.size(); ++i) {
      ops[i].index = static_cast<int>(i);
      ops[i].estimate = static_cast<double>(rng() % 5);
    }
    auto out = order_intersection(ops, std::nullopt);
    std::vector<int> idx;
    for (const auto& o : out) idx.push_back(o.index);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i) ASSERT_EQ(idx[i], static_cast<int>(i));
  }
  // Evaluation order never changes counts: stats-ordered vs stats-free plans.
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testing::random_graph(rng, 25, 250, 200);
    for (const char* name : {"cycle_3", "cycle_4", "sg_count"}) {
      const auto p = load_builtin(name);
      CompileOptions o;
      o.force_generic = true;
      o.delta_override = 60;
      std::vector<ExecutionPlan> a{compile(p, g.stats(), o)}, b{compile(p, std::nullopt, o)};
      std::reverse(a[0].cells.back().src.begin(), a[0].cells.back().src.end());
      ASSERT_EQ(mine(g, a, 1), mine(g, b, 1)) << name;
    }
  }
}

TEST(DumpPlan, Golden) {
  const std::string want =
      "plan sg_count\n"
      "  delta 604800\n"
      "  attribution trigger\n"
      "  kernel SCATTER_GATHER dir=in endpoint=src ordered=0 edge_tuples=0 k=2\n"
      "  slots 2\n"
      "  roles 4\n"
      "  cell 0 for_all -> v0\n"
      "    window [t-604800, t+0]\n"
      "    src N0.in[e1]\n"
      "    skip cand == N1\n"
      "  cell 1 intersect -> slot1\n"
      "    window [t-604800, t+0]\n"
      "    src v0.out[e2] N1.in[e3]\n"
      "  emit source_count k=2 nodes slot1\n";
  EXPECT_EQ(dump_plan(compile(load_builtin("sg_count"))), want);
}

}  // namespace
}  // namespace tempmine
