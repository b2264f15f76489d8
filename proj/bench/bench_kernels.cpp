// Kernel path vs. generic interpreter vs. serial reference on a synthetic graph.

#include <benchmark/benchmark.h>

#include "tempmine/builtin.hpp"
#include "tempmine/engine.hpp"
#include "tempmine/synth.hpp"

namespace {

using namespace tempmine;

const TemporalGraph& graph() {
  static const TemporalGraph g = [] {
    SynthConfig c;
    c.node_count = 20000;
    c.background_edges = 200000;
    c.seed = 3;
    c.plants.push_back({PlantKind::ScatterGather, 50, 3, 8, 86400});
    c.plants.push_back({PlantKind::Cycle4, 50, 3, 8, 86400});
    return build_graph(generate(c));
  }();
  return g;
}

const char* const kPatterns[] = {"fan_in", "deg_in_src", "cycle_2", "cycle_3", "cycle_4", "sg_count", "stack_count"};

std::vector<ExecutionPlan> plan_for(int index, bool force_generic) {
  CompileOptions o;
  o.force_generic = force_generic;
  return {compile(load_builtin(kPatterns[index]), graph().stats(), o)};
}

void set_counters(benchmark::State& state, int index) {
  state.SetLabel(kPatterns[index]);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * graph().edge_count()));
}

// args: pattern index, workers
void BM_Kernel(benchmark::State& state) {
  const auto plans = plan_for(static_cast<int>(state.range(0)), false);
  EngineOptions o;
  o.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(mine_full(graph(), plans, o));
  set_counters(state, static_cast<int>(state.range(0)));
}

void BM_Generic(benchmark::State& state) {
  const auto plans = plan_for(static_cast<int>(state.range(0)), true);
  EngineOptions o;
  o.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(mine_full(graph(), plans, o));
  set_counters(state, static_cast<int>(state.range(0)));
}

void BM_Serial(benchmark::State& state) {
  const auto plans = plan_for(static_cast<int>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(mine_serial(graph(), plans));
  set_counters(state, static_cast<int>(state.range(0)));
}

void pattern_args(benchmark::internal::Benchmark* b) {
  for (int i = 0; i < static_cast<int>(std::size(kPatterns)); ++i) {
    for (int w : {1, 4}) b->Args({i, w});
  }
}

BENCHMARK(BM_Kernel)->Apply(pattern_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Generic)->Apply(pattern_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Serial)->DenseRange(0, static_cast<int>(std::size(kPatterns)) - 1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
