#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tempmine/pattern.hpp"
#include "tempmine/txgraph.hpp"

namespace tempmine {

enum class KernelHint { Generic, Fan, Degree, Cycle, ScatterGather, Stack };

enum class Endpoint { Src, Dst };

struct KernelParams {
  Direction direction = Direction::In;  // fan / degree
  Endpoint endpoint = Endpoint::Src;    // degree
  int cycle_length = 0;                 // 2, 3 or 4
  bool ordered = false;
  bool edge_tuples = false;
  std::int64_t min_size = 1;
  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

struct KernelMatch {
  KernelHint hint = KernelHint::Generic;
  KernelParams params;
};

// "GENERIC", "FAN", "CYCLE_4", ...
std::string hint_name(const KernelMatch& m);

// Scalar registers: 0 = N0, 1 = N1, 2 + i = for_all output of stage i.
inline constexpr int kTriggerSrc = 0;
inline constexpr int kTriggerDst = 1;
inline constexpr int kCandidate = -1;
inline constexpr int scalar_register(int stage) { return 2 + stage; }

struct OperandRef {
  enum class Kind { Adjacency, Set, Scalar } kind = Kind::Adjacency;
  Direction direction = Direction::Out;
  int var = 0;     // scalar register (Adjacency, Scalar) or stage slot (Set)
  int role = -1;   // Adjacency only
  int index = 0;   // position in the stage's source list
  double estimate = 0.0;

  friend bool operator==(const OperandRef&, const OperandRef&) = default;
};

// Skip a candidate when (register lhs == register rhs) == equal.
struct NodePred {
  int lhs = kCandidate;
  int rhs = kCandidate;
  bool equal = true;
  friend bool operator==(const NodePred&, const NodePred&) = default;
};

// Skip an individual edge of `role`.
struct EdgeFilter {
  enum class Kind { Identity, Amount, Currency } kind = Kind::Identity;
  int role = 0;
  CmpOp op = CmpOp::Eq;
  int other_role = -1;       // Identity, Currency vs. bound edge
  double value = 0.0;        // Amount
  std::string literal;       // Currency vs. code
  friend bool operator==(const EdgeFilter&, const EdgeFilter&) = default;
};

// Stop scanning `role` (kAnyRole: every role of the cell) once e.t exceeds
// the bound: trigger time when ref_role < 0, else the bound edge's time.
// Strict bounds (>=) are stored as bound - 1.
struct TimeBound {
  int role = kAnyRole;
  int ref_role = -1;
  Timestamp offset = 0;  // added to the reference time
  friend bool operator==(const TimeBound&, const TimeBound&) = default;
};

// Keep a candidate only if time(lhs) OP time(rhs) on representative edges.
struct OrderPred {
  int lhs = 0;
  CmpOp op = CmpOp::Le;
  int rhs = 0;
  friend bool operator==(const OrderPred&, const OrderPred&) = default;
};

struct LoopCell {
  StageOp op = StageOp::ForAll;
  std::vector<OperandRef> src;  // in evaluation order (see order_intersection)
  int dst_slot = 0;
  bool scalar_output = false;
  int first_role = 0;
  int role_count = 0;
  WindowSide window = WindowSide::Backward;
  // Window relative to the trigger time t: [t + lo, t + hi].
  Timestamp window_lo = 0;
  Timestamp window_hi = 0;
  std::vector<NodePred> skip_preds;
  std::vector<EdgeFilter> edge_filters;
  std::vector<TimeBound> break_preds;
  std::vector<OrderPred> order_preds;

  friend bool operator==(const LoopCell&, const LoopCell&) = default;
};

struct CompiledEmission {
  EmitMode mode = EmitMode::SetCardinality;
  std::int64_t min_size = 1;
  Multiplicity multiplicity = Multiplicity::Nodes;
  std::vector<int> targets;  // stage slots
  friend bool operator==(const CompiledEmission&, const CompiledEmission&) = default;
};

struct ExecutionPlan {
  std::string name;
  Timestamp delta = 0;
  Attribution attribution = Attribution::Trigger;
  std::vector<LoopCell> cells;
  int slot_count = 0;
  int role_count = 0;                // including e0
  std::vector<int> role_stage;       // role -> stage (-1 for e0)
  std::vector<WindowSide> role_window;
  std::vector<int> loop_roles;       // roles bound by for_all cells, in cell order
  CompiledEmission emission;
  KernelMatch kernel;

  friend bool operator==(const ExecutionPlan&, const ExecutionPlan&) = default;
};

struct CompileOptions {
  std::optional<Timestamp> delta_override;  // may be 0, unlike a pattern file's delta
  std::optional<Attribution> attribution_override;
  bool force_generic = false;
};

ExecutionPlan compile(const ValidatedPattern& pattern, const std::optional<GraphStats>& stats = std::nullopt,
                      const CompileOptions& options = {});

// Stable permutation putting the expected-smallest operand first. Without
// stats, materialized sets and single nodes go before adjacency lists.
std::vector<OperandRef> order_intersection(std::vector<OperandRef> operands,
                                           const std::optional<GraphStats>& stats);

KernelMatch lower_builtin(const ValidatedPattern& pattern);

// Human-readable, stable rendering used by --dump-plan and golden tests.
std::string dump_plan(const ExecutionPlan& plan);

}  // namespace tempmine
