#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tempmine/plan.hpp"
#include "tempmine/txgraph.hpp"

namespace tempmine {

// Per-edge pattern counts, one row per edge_id and one column per plan.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> columns, std::size_t rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<std::string>& columns() const noexcept { return columns_; }

  Count& at(std::size_t row, std::size_t col) { return values_[row * columns_.size() + col]; }
  Count at(std::size_t row, std::size_t col) const { return values_[row * columns_.size() + col]; }
  std::span<const Count> row(std::size_t r) const {
    return {values_.data() + r * columns_.size(), columns_.size()};
  }
  std::vector<Count> column(std::size_t c) const;
  std::span<const Count> values() const noexcept { return values_; }
  std::span<Count> values() noexcept { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
  std::vector<Count> values_;
};

// Elementwise sum; every partial must have the same columns and row count.
FeatureMatrix merge_features(std::span<const FeatureMatrix> partials);

struct InstanceRecord {
  std::string pattern;
  EdgeId trigger = kNoEdge;
  std::vector<EdgeId> edges;  // sorted, includes the trigger
  std::vector<NodeId> nodes;  // sorted

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

struct EngineOptions {
  int workers = 1;
  bool force_generic = false;
  std::size_t chunk_size = 2048;  // trigger edges per scheduling unit
  // Adds one to a single count after mining. Negative control for verify.
  bool inject_fault = false;
};

struct MineResult {
  FeatureMatrix features;
  std::vector<InstanceRecord> instances;  // instance_list plans, in trigger order
};

// Parallel driver. Output does not depend on workers or chunk_size.
MineResult mine_full(const TemporalGraph& g, std::span<const ExecutionPlan> plans,
                     const EngineOptions& options = {});

FeatureMatrix mine(const TemporalGraph& g, std::span<const ExecutionPlan> plans, int workers = 1);

// Single-threaded reference: one trigger at a time through the generic
// interpreter, ignoring kernel hints.
MineResult mine_serial(const TemporalGraph& g, std::span<const ExecutionPlan> plans);

// ---- building blocks -------------------------------------------------------

struct RoleHit {
  EdgeId rep = kNoEdge;  // qualifying edge closest to the trigger time
  Timestamp t = 0;
  std::uint32_t mult = 0;  // number of qualifying edges
};

// Stage output: ascending node ids, plus one RoleHit per (node, role of the
// producing cell). mult == 0 marks a union member not reached by that role.
struct NodeSet {
  std::vector<NodeId> nodes;
  int role_count = 0;
  std::vector<RoleHit> hits;

  const RoleHit& hit(std::size_t i, int k) const { return hits[i * static_cast<std::size_t>(role_count) + static_cast<std::size_t>(k)]; }
  std::size_t size() const noexcept { return nodes.size(); }
  void clear(int roles) {
    nodes.clear();
    hits.clear();
    role_count = roles;
  }
};

struct Bindings {
  EdgeId trigger = kNoEdge;
  Timestamp t = 0;
  std::vector<NodeId> registers;   // scalar registers, see scalar_register()
  std::vector<NodeSet> slots;      // one per stage
  std::vector<RoleHit> bound;      // e0 and the current for_all roles
  std::vector<NodeId> role_base;   // node whose adjacency a role scans
  std::vector<TimeWindow> role_window;  // effective bounds after break_if

  void reset(const ExecutionPlan& plan, const TemporalGraph& g, EdgeId e);
};

// Reusable per-worker buffers sized to the graph.
class Scratch {
 public:
  explicit Scratch(NodeId node_count);

  // Starts a new marking round on table `k` and returns its generation.
  std::uint32_t next(int k);
  bool marked(int k, NodeId u) const { return stamp_[k][u] == gen_[k]; }
  void mark(int k, NodeId u) { stamp_[k][u] = gen_[k]; }
  std::uint32_t& slot(int k, NodeId u) { return index_[k][u]; }

  std::vector<NodeSet> operands;
  std::vector<NodeSet> spare;

 private:
  static constexpr int kTables = 3;
  std::array<std::vector<std::uint32_t>, kTables> stamp_;
  std::array<std::vector<std::uint32_t>, kTables> index_;
  std::array<std::uint32_t, kTables> gen_{};
};

// Evaluates one loop cell under the current bindings. Also records each of
// the cell's roles' base node and effective window in `b`.
void execute_cell(const LoopCell& cell, const ExecutionPlan& plan, Bindings& b, const TemporalGraph& g,
                  Scratch& scratch, NodeSet& out);

// Index pairs (i, j) with a[i] == b[j]. Merge walk when the sizes are within
// a factor of 32, galloping search of the larger side otherwise.
void intersect_sorted(std::span<const NodeId> a, std::span<const NodeId> b,
                      std::vector<std::pair<std::uint32_t, std::uint32_t>>& out);
std::vector<NodeId> intersect_sorted(std::span<const NodeId> a, std::span<const NodeId> b);

// ---- specialized kernels (trigger attribution) ----------------------------

class KernelScratch {
 public:
  explicit KernelScratch(NodeId node_count);
  std::uint32_t next(int k);
  bool marked(int k, NodeId u) const { return stamp_[k][u] == gen_[k]; }
  void mark(int k, NodeId u) { stamp_[k][u] = gen_[k]; }
  Timestamp& time(int k, NodeId u) { return time_[k][u]; }
  std::uint32_t& count(int k, NodeId u) { return count_[k][u]; }
  std::vector<NodeId> list_a, list_b;

 private:
  static constexpr int kTables = 3;
  std::array<std::vector<std::uint32_t>, kTables> stamp_;
  std::array<std::vector<Timestamp>, kTables> time_;
  std::array<std::vector<std::uint32_t>, kTables> count_;
  std::array<std::uint32_t, kTables> gen_{};
};

Count count_fan(const TemporalGraph& g, EdgeId e, Direction d, Timestamp delta);
// {deg_in_src, deg_out_src, deg_in_dst, deg_out_dst}
std::array<Count, 4> count_degree(const TemporalGraph& g, EdgeId e, Timestamp delta);
Count count_cycles(const TemporalGraph& g, EdgeId e, Timestamp delta, int length, bool ordered,
                   bool edge_tuples, KernelScratch& s);
Count count_scatter_gather(const TemporalGraph& g, EdgeId e, Timestamp delta, std::int64_t min_size,
                           bool ordered, KernelScratch& s);
Count count_stack(const TemporalGraph& g, EdgeId e, Timestamp delta, bool ordered, std::int64_t min_size,
                  KernelScratch& s);

// Dispatches on plan.kernel; the plan must carry a non-generic hint.
Count run_kernel(const ExecutionPlan& plan, const TemporalGraph& g, EdgeId e, KernelScratch& s);

// ---- export ----------------------------------------------------------------

// edge_id,src,dst,timestamp,label,<columns...>; LF line endings.
void write_feature_csv(std::ostream& out, const TemporalGraph& g, const FeatureMatrix& m);
void write_feature_csv(const std::filesystem::path& path, const TemporalGraph& g, const FeatureMatrix& m);

}  // namespace tempmine
