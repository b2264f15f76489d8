#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempmine/engine.hpp"
#include "tempmine/pattern.hpp"
#include "tempmine/txgraph.hpp"

namespace tempmine {

// Exhaustive reference semantics, evaluated straight from the pattern AST:
// every candidate node is tried at every stage and every edge between two
// nodes is checked against the window and constraints by definition.
struct OracleOptions {
  std::optional<Timestamp> delta;
  std::optional<Attribution> attribution;
  NodeId max_nodes = 64;
  bool ignore_size_guard = false;
};

struct OracleResult {
  std::vector<Count> counts;              // per edge_id
  std::vector<InstanceRecord> instances;  // instance_list patterns only
};

// Throws ConfigError when the graph exceeds the node guard.
OracleResult enumerate_bruteforce(const TemporalGraph& g, const ValidatedPattern& pattern,
                                  const OracleOptions& options = {});

struct Mismatch {
  EdgeId edge = 0;
  Count expected = 0;
  Count actual = 0;
  friend bool operator==(const Mismatch&, const Mismatch&) = default;
};

struct OracleReport {
  std::string pattern;
  std::vector<Count> expected;
  std::vector<Mismatch> mismatches;
  bool ok() const noexcept { return mismatches.empty(); }
};

// Throws InvariantError when the two vectors differ in length.
OracleReport compare(std::string pattern, std::span<const Count> expected, std::span<const Count> actual);

// Fixed-width table: one header line, one line per mismatch (capped), summary.
std::string format_report(const OracleReport& report, std::size_t max_rows = 20);

}  // namespace tempmine
