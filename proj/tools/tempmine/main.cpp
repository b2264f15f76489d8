#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tempmine/builtin.hpp"
#include "tempmine/engine.hpp"
#include "tempmine/oracle.hpp"
#include "tempmine/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tempmine;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Bad flags, unreadable pattern files and failed validation.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphSource {
  std::string input;
  std::string cache;
  std::string time_unit = "seconds";
};

struct PatternArgs {
  std::vector<std::string> files;
  bool builtins = false;
  std::vector<std::string> deltas;
  std::string attribution;
  bool force_generic = false;
};

struct LoadedPattern {
  std::string source;
  ValidatedPattern pattern;
};

void add_graph_flags(CLI::App& cmd, GraphSource& g) {
  cmd.add_option("--input", g.input, "Transaction CSV (IBM AML layout)");
  cmd.add_option("--cache", g.cache, "Graph cache written by 'ingest'");
  cmd.add_option("--time-unit", g.time_unit, "Resolution for calendar timestamps")
      ->check(CLI::IsMember({"seconds", "minutes", "hours"}));
}

void add_pattern_flags(CLI::App& cmd, PatternArgs& p, bool with_attribution) {
  cmd.add_option("--pattern", p.files, "Pattern file, or builtin:NAME (repeatable)");
  cmd.add_flag("--builtins", p.builtins, "Add the 11 builtin feature patterns");
  cmd.add_option("--delta", p.deltas, "Window override NAME=SECONDS, or *=SECONDS for every pattern");
  if (with_attribution) {
    cmd.add_option("--attribution", p.attribution, "Count attribution")
        ->check(CLI::IsMember({"trigger", "members"}));
  }
  cmd.add_flag("--force-generic", p.force_generic, "Run every pattern through the interpreter");
}

TemporalGraph load_graph(const GraphSource& src) {
  if (!src.cache.empty()) return load_graph_cache(src.cache);
  if (src.input.empty()) throw UsageError("one of --input or --cache is required");
  auto mapping = ColumnMapping::ibm_default();
  if (src.time_unit == "minutes") mapping.time_unit = TimeUnit::Minutes;
  if (src.time_unit == "hours") mapping.time_unit = TimeUnit::Hours;
  return build_graph(parse_transactions_file(src.input, mapping));
}

std::vector<LoadedPattern> load_patterns(const PatternArgs& args) {
  std::vector<LoadedPattern> out;
  if (args.builtins) {
    for (const auto& b : builtin_patterns()) out.push_back({"builtin:" + std::string(b.name), load_builtin(b.name)});
  }
  for (const auto& f : args.files) {
    if (f.rfind("builtin:", 0) == 0) {
      const auto name = f.substr(8);
      if (find_builtin(name) == nullptr) throw UsageError("unknown builtin pattern '" + name + "'");
      out.push_back({f, load_builtin(name)});
      continue;
    }
    if (!fs::exists(f)) throw UsageError("pattern file not found: " + f);
    auto r = load_pattern_file(f);
    if (!r.ok()) {
      std::string msg;
      for (const auto& d : r.diagnostics) msg += d.to_string() + "\n";
      throw UsageError(msg + "pattern " + f + " failed validation");
    }
    out.push_back({f, std::move(*r.pattern)});
  }
  if (out.empty()) throw UsageError("no patterns given; use --pattern or --builtins");
  std::map<std::string, int> seen;
  for (const auto& p : out) {
    if (seen[p.pattern.spec().name]++ > 0) throw UsageError("duplicate pattern name '" + p.pattern.spec().name + "'");
  }
  return out;
}

std::map<std::string, Timestamp> parse_deltas(const std::vector<std::string>& items,
                                              const std::vector<LoadedPattern>& patterns) {
  std::map<std::string, Timestamp> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--delta expects NAME=SECONDS, got '" + item + "'");
    const auto name = item.substr(0, eq);
    Timestamp v = 0;
    try {
      std::size_t used = 0;
      v = std::stoll(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("--delta value is not an integer: '" + item + "'");
    }
    if (v < 0) throw UsageError("--delta must be non-negative: '" + item + "'");
    if (name == "*") {
      for (const auto& p : patterns) out[p.pattern.spec().name] = v;
      continue;
    }
    const bool known = std::any_of(patterns.begin(), patterns.end(),
                                   [&](const LoadedPattern& p) { return p.pattern.spec().name == name; });
    if (!known) throw UsageError("--delta names unknown pattern '" + name + "'");
    out[name] = v;
  }
  return out;
}

std::vector<ExecutionPlan> compile_all(const std::vector<LoadedPattern>& patterns, const PatternArgs& args,
                                       const TemporalGraph& g) {
  const auto deltas = parse_deltas(args.deltas, patterns);
  std::vector<ExecutionPlan> plans;
  for (const auto& p : patterns) {
    CompileOptions o;
    o.force_generic = args.force_generic;
    if (const auto it = deltas.find(p.pattern.spec().name); it != deltas.end()) o.delta_override = it->second;
    if (args.attribution == "trigger") o.attribution_override = Attribution::Trigger;
    if (args.attribution == "members") o.attribution_override = Attribution::Members;
    plans.push_back(compile(p.pattern, g.stats(), o));
  }
  return plans;
}

int resolve_workers(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("TEMPMINE_WORKERS")) {
    const int v = std::atoi(env);
    if (v < 1) throw UsageError("TEMPMINE_WORKERS must be a positive integer");
    return v;
  }
  return 1;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_manifest(const fs::path& out, const json& j) {
  const fs::path path = out.string() + ".manifest.json";
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

json graph_inputs(const GraphSource& src) {
  json j = json::object();
  if (!src.input.empty()) j["input"] = src.input;
  if (!src.cache.empty()) j["cache"] = src.cache;
  return j;
}

json plan_entries(const std::vector<LoadedPattern>& patterns, const std::vector<ExecutionPlan>& plans) {
  json arr = json::array();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    arr.push_back({{"name", plans[i].name},
                   {"source", patterns[i].source},
                   {"delta", plans[i].delta},
                   {"attribution", plans[i].attribution == Attribution::Members ? "members" : "trigger"},
                   {"kernel", hint_name(plans[i].kernel)}});
  }
  return arr;
}

void print_stats(const TemporalGraph& g) {
  const auto& s = g.stats();
  std::printf("nodes: %u\nedges: %zu\nmean out-degree: %.3f\np99 out-degree: %.1f\np99 in-degree: %.1f\n",
              g.node_count(), g.edge_count(), s.mean_out, s.p99_out, s.p99_in);
}

int cmd_ingest(const GraphSource& src, const std::string& cache_out) {
  if (src.input.empty()) throw UsageError("ingest needs --input");
  if (cache_out.empty()) throw UsageError("ingest needs --out for the cache path");
  const auto start = std::chrono::steady_clock::now();
  GraphSource in = src;
  in.cache.clear();
  const auto g = load_graph(in);
  save_graph_cache(g, cache_out);
  print_stats(g);
  write_manifest(cache_out, {{"command", "ingest"},
                             {"inputs", graph_inputs(in)},
                             {"outputs", {cache_out}},
                             {"nodes", g.node_count()},
                             {"edges", g.edge_count()},
                             {"wall_seconds", seconds_since(start)}});
  return 0;
}

int cmd_mine(const GraphSource& src, const PatternArgs& pargs, int workers_flag, const std::string& out,
             const std::string& instances_out, bool dump) {
  if (out.empty()) throw UsageError("mine needs --out");
  const auto patterns = load_patterns(pargs);
  const int workers = resolve_workers(workers_flag);
  const auto g = load_graph(src);
  const auto plans = compile_all(patterns, pargs, g);
  if (dump) {
    for (const auto& p : plans) std::cerr << dump_plan(p) << "\n";
  }
  EngineOptions opts;
  opts.workers = workers;
  opts.force_generic = pargs.force_generic;
  const auto start = std::chrono::steady_clock::now();
  const auto result = mine_full(g, plans, opts);
  const double mine_s = seconds_since(start);
  write_feature_csv(fs::path(out), g, result.features);
  json outputs = json::array({out});
  if (!instances_out.empty()) {
    write_instances_jsonl(fs::path(instances_out), result.instances);
    outputs.push_back(instances_out);
  }
  const double eps = mine_s > 0 ? static_cast<double>(g.edge_count()) / mine_s : 0.0;
  std::printf("mined %zu edges x %zu patterns with %d worker(s) in %.3f s (%.0f edges/s)\n", g.edge_count(),
              plans.size(), workers, mine_s, eps);
  write_manifest(out, {{"command", "mine"},
                       {"inputs", graph_inputs(src)},
                       {"patterns", plan_entries(patterns, plans)},
                       {"workers", workers},
                       {"force_generic", pargs.force_generic},
                       {"outputs", outputs},
                       {"edges", g.edge_count()},
                       {"wall_seconds", mine_s},
                       {"edges_per_second", eps}});
  return 0;
}

int cmd_verify(const GraphSource& src, const PatternArgs& pargs, NodeId max_nodes, bool inject_fault) {
  const auto patterns = load_patterns(pargs);
  const auto g = load_graph(src);
  if (g.node_count() > max_nodes) {
    std::cerr << "refusing to verify: graph has " << g.node_count() << " nodes, oracle limit is " << max_nodes
              << " (raise --max-nodes to override)\n";
    return kExitUsage;
  }
  const auto plans = compile_all(patterns, pargs, g);
  EngineOptions opts;
  opts.force_generic = pargs.force_generic;
  opts.inject_fault = inject_fault;
  const auto mined = mine_full(g, plans, opts).features;
  bool ok = true;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    OracleOptions o;
    o.delta = plans[i].delta;
    o.attribution = plans[i].attribution;
    o.max_nodes = max_nodes;
    const auto expected = enumerate_bruteforce(g, patterns[i].pattern, o);
    const auto actual = mined.column(i);
    const auto report = compare(plans[i].name, expected.counts, actual);
    std::cout << format_report(report);
    ok = ok && report.ok();
  }
  std::cout << (ok ? "verify: OK\n" : "verify: MISMATCH\n");
  return ok ? 0 : kExitRuntime;
}

struct SynthArgs {
  std::string out;
  std::string truth;
  NodeId nodes = 10000;
  std::size_t edges = 100000;
  std::size_t sg = 0;
  std::size_t cycles = 0;
  int fanout_min = 3;
  int fanout_max = 8;
  Timestamp span = 86400;
  Timestamp horizon = 365 * 86400;
  double exponent = 2.1;
  std::uint64_t seed = 1;
  bool no_labels = false;
};

int cmd_synth(const SynthArgs& a) {
  if (a.out.empty()) throw UsageError("synth needs --out");
  SynthConfig c;
  c.node_count = a.nodes;
  c.background_edges = a.edges;
  c.time_horizon = a.horizon;
  c.exponent = a.exponent;
  c.seed = a.seed;
  c.label_planted = !a.no_labels;
  if (a.sg > 0) c.plants.push_back({PlantKind::ScatterGather, a.sg, a.fanout_min, a.fanout_max, a.span});
  if (a.cycles > 0) c.plants.push_back({PlantKind::Cycle4, a.cycles, 3, 8, a.span});
  const auto s = generate(c);
  write_synth_csv(fs::path(a.out), s);
  const std::string truth = a.truth.empty() ? a.out + ".truth.jsonl" : a.truth;
  write_instances_jsonl(fs::path(truth), s.instances);
  std::printf("wrote %zu edges over %u nodes, %zu planted instances\n", s.records.size(), s.node_count,
              s.instances.size());
  write_manifest(a.out, {{"command", "synth"},
                         {"outputs", {a.out, truth}},
                         {"seed", a.seed},
                         {"nodes", a.nodes},
                         {"background_edges", a.edges},
                         {"scatter_gathers", a.sg},
                         {"cycles", a.cycles},
                         {"fanout", {a.fanout_min, a.fanout_max}},
                         {"span", a.span},
                         {"time_horizon", a.horizon},
                         {"exponent", a.exponent}});
  return 0;
}

int cmd_bench(const GraphSource& src, const PatternArgs& pargs, const std::vector<int>& sweep, int repeats,
              const std::string& out) {
  const auto patterns = load_patterns(pargs);
  const auto g = load_graph(src);
  const auto plans = compile_all(patterns, pargs, g);
  json rows = json::array();
  double base = 0.0;
  std::printf("%8s %12s %14s %8s\n", "workers", "seconds", "edges/s", "speedup");
  for (const int w : sweep) {
    if (w < 1) throw UsageError("--sweep entries must be positive");
    EngineOptions o;
    o.workers = w;
    o.force_generic = pargs.force_generic;
    double best = 0.0;
    for (int r = 0; r < std::max(1, repeats); ++r) {
      const auto start = std::chrono::steady_clock::now();
      const auto m = mine_full(g, plans, o);
      const double s = seconds_since(start);
      if (r == 0 || s < best) best = s;
    }
    const double eps = best > 0 ? static_cast<double>(g.edge_count()) / best : 0.0;
    if (base == 0.0) base = eps;
    const double speedup = base > 0 ? eps / base : 0.0;
    std::printf("%8d %12.4f %14.0f %8.2f\n", w, best, eps, speedup);
    rows.push_back({{"workers", w}, {"seconds", best}, {"edges_per_second", eps}, {"speedup", speedup}});
  }
  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw IoError("cannot write " + out);
    f << "workers,seconds,edges_per_second,speedup\n";
    for (const auto& r : rows) {
      char line[128];
      std::snprintf(line, sizeof line, "%d,%.6f,%.0f,%.4f\n", r["workers"].get<int>(), r["seconds"].get<double>(),
                    r["edges_per_second"].get<double>(), r["speedup"].get<double>());
      f << line;
    }
    write_manifest(out, {{"command", "bench"},
                         {"inputs", graph_inputs(src)},
                         {"patterns", plan_entries(patterns, plans)},
                         {"outputs", {out}},
                         {"edges", g.edge_count()},
                         {"rows", rows}});
  }
  return 0;
}

int cmd_plan(const GraphSource& src, const PatternArgs& pargs) {
  const auto patterns = load_patterns(pargs);
  std::optional<TemporalGraph> g;
  if (!src.cache.empty() || !src.input.empty()) g = load_graph(src);
  const auto deltas = parse_deltas(pargs.deltas, patterns);
  for (const auto& p : patterns) {
    CompileOptions o;
    o.force_generic = pargs.force_generic;
    if (const auto it = deltas.find(p.pattern.spec().name); it != deltas.end()) o.delta_override = it->second;
    std::optional<GraphStats> stats;
    if (g) stats = g->stats();
    std::cout << dump_plan(compile(p.pattern, stats, o)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tempmine: temporal transaction-graph pattern mining"};
  app.require_subcommand(1);

  GraphSource gsrc;
  PatternArgs pargs;
  std::string out, instances_out;
  int workers = 0;
  bool dump = false;

  auto* ingest = app.add_subcommand("ingest", "Parse a transaction CSV into a graph cache");
  add_graph_flags(*ingest, gsrc);
  ingest->add_option("--out", out, "Cache path");

  auto* mine = app.add_subcommand("mine", "Count patterns per transaction and write a feature CSV");
  add_graph_flags(*mine, gsrc);
  add_pattern_flags(*mine, pargs, true);
  mine->add_option("--workers", workers, "Worker threads (default: TEMPMINE_WORKERS or 1)");
  mine->add_option("--out", out, "Feature CSV path");
  mine->add_option("--instances", instances_out, "Instance list JSONL path (instance_list patterns)");
  mine->add_flag("--dump-plan", dump, "Print compiled plans to stderr");

  NodeId max_nodes = 64;
  bool inject_fault = false;
  auto* verify = app.add_subcommand("verify", "Compare engine counts with the brute-force oracle");
  add_graph_flags(*verify, gsrc);
  add_pattern_flags(*verify, pargs, true);
  verify->add_option("--max-nodes", max_nodes, "Oracle size guard");
  verify->add_flag("--inject-fault", inject_fault, "Perturb one engine count (negative control)");

  SynthArgs sargs;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic graph with planted patterns");
  synth->add_option("--out", sargs.out, "CSV path");
  synth->add_option("--truth", sargs.truth, "Ground-truth JSONL path (default: <out>.truth.jsonl)");
  synth->add_option("--nodes", sargs.nodes, "Node count");
  synth->add_option("--edges", sargs.edges, "Background edge count");
  synth->add_option("--sg", sargs.sg, "Planted scatter-gathers");
  synth->add_option("--cycles", sargs.cycles, "Planted 4-cycles");
  synth->add_option("--fanout-min", sargs.fanout_min, "Smallest scatter-gather fanout");
  synth->add_option("--fanout-max", sargs.fanout_max, "Largest scatter-gather fanout");
  synth->add_option("--span", sargs.span, "Time spread of one planted instance");
  synth->add_option("--horizon", sargs.horizon, "Time horizon of the background");
  synth->add_option("--exponent", sargs.exponent, "Out-degree power-law exponent");
  synth->add_option("--seed", sargs.seed, "RNG seed");
  synth->add_flag("--no-labels", sargs.no_labels, "Leave planted edges unlabeled");

  std::vector<int> sweep{1, 2, 4, 8};
  int repeats = 1;
  auto* bench = app.add_subcommand("bench", "Throughput sweep over worker counts");
  add_graph_flags(*bench, gsrc);
  add_pattern_flags(*bench, pargs, false);
  bench->add_option("--sweep", sweep, "Worker counts")->delimiter(',');
  bench->add_option("--repeats", repeats, "Runs per worker count; the fastest is reported");
  bench->add_option("--out", out, "Throughput table CSV");

  auto* plan = app.add_subcommand("plan", "Print compiled execution plans");
  add_graph_flags(*plan, gsrc);
  add_pattern_flags(*plan, pargs, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(gsrc, out);
    if (*mine) return cmd_mine(gsrc, pargs, workers, out, instances_out, dump);
    if (*verify) return cmd_verify(gsrc, pargs, max_nodes, inject_fault);
    if (*synth) return cmd_synth(sargs);
    if (*bench) return cmd_bench(gsrc, pargs, sweep, repeats, out);
    if (*plan) return cmd_plan(gsrc, pargs);
  } catch (const UsageError& e) {
    std::cerr << "tempmine: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "tempmine: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "tempmine: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
