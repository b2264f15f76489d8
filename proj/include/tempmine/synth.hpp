#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tempmine/engine.hpp"
#include "tempmine/txgraph.hpp"

namespace tempmine {

enum class PlantKind { ScatterGather, Cycle4 };

// `count` instances; scatter-gather fanout is drawn uniformly from
// [min_size, max_size]. Every member edge of one instance lies inside
// [T, T + span] and the trigger edge is the only one at T + span.
struct PlantSpec {
  PlantKind kind = PlantKind::ScatterGather;
  std::size_t count = 0;
  int min_size = 3;
  int max_size = 8;
  Timestamp span = 86400;
};

struct SynthConfig {
  NodeId node_count = 10000;
  std::size_t background_edges = 100000;
  Timestamp time_horizon = 365 * 86400;
  double exponent = 2.1;  // out-degree power law
  std::uint64_t seed = 1;
  std::vector<PlantSpec> plants;
  bool label_planted = true;
};

struct SynthResult {
  // Sorted by timestamp with edge_id = position. Node ids follow first
  // appearance, so re-ingesting the CSV reproduces them.
  std::vector<TransactionRecord> records;
  std::vector<std::string> currencies;
  NodeId node_count = 0;
  // One record per plant: pattern is "sg_count" or "cycle_4".
  std::vector<InstanceRecord> instances;
};

// Throws ConfigError for an infeasible configuration, naming the plant.
SynthResult generate(const SynthConfig& config);

TemporalGraph build_graph(const SynthResult& synth);

// Same column layout txgraph ingests with ColumnMapping::ibm_default().
void write_synth_csv(std::ostream& out, const SynthResult& synth);
void write_synth_csv(const std::filesystem::path& path, const SynthResult& synth);

// One JSON object per line: {"pattern", "trigger", "edges", "nodes"}.
void write_instances_jsonl(std::ostream& out, const std::vector<InstanceRecord>& instances);
void write_instances_jsonl(const std::filesystem::path& path, const std::vector<InstanceRecord>& instances);
std::vector<InstanceRecord> read_instances_jsonl(const std::filesystem::path& path);

}  // namespace tempmine
