#include "tempmine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

namespace tempmine {

namespace {

const char* kind_name(PlantKind k) { return k == PlantKind::ScatterGather ? "scatter_gather" : "cycle_4"; }

struct Draft {
  NodeId src;
  NodeId dst;
  Timestamp t;
  double amount;
  CurrencyId currency;
  bool planted;
  int plant = -1;  // index into the instance list
  bool trigger = false;
};

double cents(double x) { return std::round(x * 100.0) / 100.0; }

// k distinct nodes, uniformly.
std::vector<NodeId> distinct_nodes(std::mt19937_64& rng, NodeId n, int k) {
  std::vector<NodeId> out;
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  while (static_cast<int>(out.size()) < k) {
    const NodeId x = pick(rng);
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

void check(const SynthConfig& c) {
  if (c.background_edges > 0 && c.node_count < 2) throw ConfigError("background edges need at least 2 nodes");
  if (c.time_horizon <= 0) throw ConfigError("time_horizon must be positive");
  if (c.exponent <= 1.0) throw ConfigError("exponent must exceed 1");
  for (std::size_t i = 0; i < c.plants.size(); ++i) {
    const auto& p = c.plants[i];
    const std::string name = "plant " + std::to_string(i) + " (" + kind_name(p.kind) + ")";
    if (p.count == 0) throw ConfigError(name + ": count must be positive");
    if (p.span < 1) throw ConfigError(name + ": span must be at least 1");
    if (p.kind == PlantKind::ScatterGather) {
      if (p.min_size < 1 || p.max_size < p.min_size) throw ConfigError(name + ": invalid fanout range");
      if (static_cast<std::int64_t>(p.max_size) + 2 > c.node_count) {
        throw ConfigError(name + ": fanout " + std::to_string(p.max_size) + " needs more than " +
                          std::to_string(c.node_count) + " nodes");
      }
      // Each leg pair needs its own strictly ordered timestamps below T + span.
      if (p.span < 2) throw ConfigError(name + ": span too short for ordered legs");
    } else if (c.node_count < 4) {
      throw ConfigError(name + ": a 4-cycle needs 4 nodes");
    } else if (p.span < 3) {
      throw ConfigError(name + ": span too short for an ordered 4-cycle");
    }
    if (p.span > c.time_horizon) throw ConfigError(name + ": span exceeds the time horizon");
  }
}

}  // namespace

SynthResult generate(const SynthConfig& config) {
  check(config);
  std::mt19937_64 rng(config.seed);
  std::vector<Draft> drafts;
  drafts.reserve(config.background_edges);

  const std::vector<std::string> currencies{"US Dollar", "Euro", "Yuan", "UK Pound"};
  std::discrete_distribution<int> currency_pick({85, 8, 4, 3});
  std::lognormal_distribution<double> amount_pick(7.0, 1.5);

  if (config.background_edges > 0) {
    // Zipf-like out-degree: the node at rank i is drawn with weight
    // (i+1)^(-1/(alpha-1)) over a random rank permutation.
    std::vector<NodeId> rank(config.node_count);
    std::iota(rank.begin(), rank.end(), 0);
    std::shuffle(rank.begin(), rank.end(), rng);
    const double power = -1.0 / (config.exponent - 1.0);
    std::vector<double> weights(config.node_count);
    for (NodeId i = 0; i < config.node_count; ++i) weights[i] = std::pow(static_cast<double>(i) + 1.0, power);
    std::discrete_distribution<NodeId> src_pick(weights.begin(), weights.end());
    std::uniform_int_distribution<NodeId> dst_pick(0, config.node_count - 2);
    std::uniform_int_distribution<Timestamp> time_pick(0, config.time_horizon - 1);
    for (std::size_t i = 0; i < config.background_edges; ++i) {
      const NodeId s = rank[src_pick(rng)];
      NodeId d = dst_pick(rng);
      if (d >= s) ++d;
      drafts.push_back(Draft{s, d, time_pick(rng), cents(amount_pick(rng)),
                             static_cast<CurrencyId>(currency_pick(rng)), false});
    }
  }

  SynthResult out;
  out.currencies = currencies;
  int plant_index = 0;
  for (const auto& p : config.plants) {
    std::uniform_int_distribution<Timestamp> start_pick(0, config.time_horizon - p.span);
    for (std::size_t c = 0; c < p.count; ++c, ++plant_index) {
      const Timestamp t0 = start_pick(rng);
      const Timestamp trigger_t = t0 + p.span;
      const double amount = cents(amount_pick(rng) * 10.0);
      const auto add = [&](NodeId s, NodeId d, Timestamp t, bool trigger) {
        drafts.push_back(Draft{s, d, t, amount, 0, true, plant_index, trigger});
      };
      InstanceRecord rec;
      if (p.kind == PlantKind::ScatterGather) {
        const int k = std::uniform_int_distribution<int>(p.min_size, p.max_size)(rng);
        const auto nodes = distinct_nodes(rng, config.node_count, k + 2);
        const NodeId src = nodes[0], dst = nodes[1];
        // Scatter legs land in the first half of the span, gathers after them.
        const Timestamp half = std::max<Timestamp>(1, p.span / 2);
        std::uniform_int_distribution<Timestamp> early(t0, t0 + half - 1);
        for (int i = 0; i < k; ++i) {
          const NodeId mid = nodes[static_cast<std::size_t>(i) + 2];
          const Timestamp ts = early(rng);
          add(src, mid, ts, false);
          if (i + 1 < k) {
            add(mid, dst, std::uniform_int_distribution<Timestamp>(ts + 1, trigger_t - 1)(rng), false);
          } else {
            add(mid, dst, trigger_t, true);
          }
        }
        rec.pattern = "sg_count";
      } else {
        const auto nodes = distinct_nodes(rng, config.node_count, 4);
        // a -> b -> c -> d, closed by the trigger d -> a.
        std::vector<Timestamp> ts{std::uniform_int_distribution<Timestamp>(t0, trigger_t - 1)(rng),
                                  std::uniform_int_distribution<Timestamp>(t0, trigger_t - 1)(rng),
                                  std::uniform_int_distribution<Timestamp>(t0, trigger_t - 1)(rng)};
        std::sort(ts.begin(), ts.end());
        add(nodes[0], nodes[1], ts[0], false);
        add(nodes[1], nodes[2], ts[1], false);
        add(nodes[2], nodes[3], ts[2], false);
        add(nodes[3], nodes[0], trigger_t, true);
        rec.pattern = "cycle_4";
      }
      out.instances.push_back(std::move(rec));
    }
  }

  std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) { return a.t < b.t; });

  // Relabel nodes by first appearance, matching the ingest order.
  std::vector<NodeId> relabel(config.node_count, kNoNode);
  NodeId next = 0;
  const auto label_of = [&](NodeId x) {
    if (relabel[x] == kNoNode) relabel[x] = next++;
    return relabel[x];
  };
  out.records.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    const auto& d = drafts[i];
    TransactionRecord r;
    r.edge_id = static_cast<EdgeId>(i);
    r.src = label_of(d.src);
    r.dst = label_of(d.dst);
    r.timestamp = d.t;
    r.amount = d.amount;
    r.currency = d.currency;
    r.label = config.label_planted && d.planted;
    out.records.push_back(r);
    if (d.plant >= 0) {
      auto& inst = out.instances[static_cast<std::size_t>(d.plant)];
      inst.edges.push_back(r.edge_id);
      inst.nodes.push_back(r.src);
      inst.nodes.push_back(r.dst);
      if (d.trigger) inst.trigger = r.edge_id;
    }
  }
  out.node_count = next;
  for (auto& inst : out.instances) {
    std::sort(inst.edges.begin(), inst.edges.end());
    std::sort(inst.nodes.begin(), inst.nodes.end());
    inst.nodes.erase(std::unique(inst.nodes.begin(), inst.nodes.end()), inst.nodes.end());
  }
  return out;
}

TemporalGraph build_graph(const SynthResult& synth) {
  return build_graph(synth.records, synth.node_count, synth.currencies);
}

void write_synth_csv(std::ostream& out, const SynthResult& synth) {
  out << "Timestamp,From Bank,Account,To Bank,Account,Amount Received,Receiving Currency,"
         "Amount Paid,Payment Currency,Payment Format,Is Laundering\n";
  std::string buf;
  char line[256];
  for (const auto& r : synth.records) {
    const char* cur = synth.currencies[r.currency].c_str();
    std::snprintf(line, sizeof line, "%lld,10,%08X,10,%08X,%.2f,%s,%.2f,%s,Wire,%d\n",
                  static_cast<long long>(r.timestamp), r.src, r.dst, r.amount, cur, r.amount, cur,
                  r.label.value_or(false) ? 1 : 0);
    buf += line;
    if (buf.size() > (1 << 16)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  if (!out) throw IoError("failed writing synthetic CSV");
}

void write_synth_csv(const std::filesystem::path& path, const SynthResult& synth) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_synth_csv(out, synth);
}

void write_instances_jsonl(std::ostream& out, const std::vector<InstanceRecord>& instances) {
  for (const auto& r : instances) {
    nlohmann::json j{{"pattern", r.pattern}, {"trigger", r.trigger}, {"edges", r.edges}, {"nodes", r.nodes}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing instance list");
}

void write_instances_jsonl(const std::filesystem::path& path, const std::vector<InstanceRecord>& instances) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_instances_jsonl(out, instances);
}

std::vector<InstanceRecord> read_instances_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<InstanceRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      InstanceRecord r;
      r.pattern = j.at("pattern").get<std::string>();
      r.trigger = j.at("trigger").get<EdgeId>();
      r.edges = j.at("edges").get<std::vector<EdgeId>>();
      r.nodes = j.at("nodes").get<std::vector<NodeId>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tempmine
