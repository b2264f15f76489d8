#pragma once

// Multi-stage pattern language. The concrete syntax and the matching
// semantics are documented in docs/pattern_language.md.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tempmine/types.hpp"

namespace tempmine {

struct SourcePos {
  int line = 0;
  int col = 0;
};

struct Diagnostic {
  std::string file;
  SourcePos pos;
  int stage = -1;  // 0-based stage index, -1 when not stage-specific
  std::string message;

  // file:line:col: [stage N: ]message, N 1-based
  std::string to_string() const;
};

enum class StageOp { ForAll, Intersect, Union, Differentiate };
enum class Accessor { InNeigh, OutNeigh, Self };
enum class WindowSide { Backward, Forward };
enum class ConstraintKind { SkipIf, BreakIf, Order };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class EmitMode { SetCardinality, SourceCount, PairProduct, InstanceList };
enum class Multiplicity { Nodes, Edges };
enum class Attribution { Trigger, Members };

// Edge roles are numbered: e0 is the trigger edge, e1, e2, ... are the
// adjacency operands in document order.
inline constexpr int kAnyRole = -1;  // the bare `e` in break_if: every role of the stage

struct Operand {
  std::string base;
  Accessor accessor = Accessor::Self;
  friend bool operator==(const Operand&, const Operand&) = default;
};

// N2 == N1
struct NodeCompare {
  std::string lhs;
  CmpOp op = CmpOp::Eq;
  std::string rhs;
  friend bool operator==(const NodeCompare&, const NodeCompare&) = default;
};

// e1 == e0 (same transaction)
struct EdgeIdentity {
  int lhs = 0;
  CmpOp op = CmpOp::Eq;
  int rhs = 0;
  friend bool operator==(const EdgeIdentity&, const EdgeIdentity&) = default;
};

// e2.t <= e3.t, e.t > t
struct TimeCompare {
  int lhs = 0;
  CmpOp op = CmpOp::Le;
  std::optional<int> rhs;  // nullopt: the trigger time t
  friend bool operator==(const TimeCompare&, const TimeCompare&) = default;
};

// e1.amount >= 5000  (experimental)
struct AmountCompare {
  int role = 0;
  CmpOp op = CmpOp::Ge;
  double value = 0.0;
  friend bool operator==(const AmountCompare&, const AmountCompare&) = default;
};

// e1.currency != e0.currency, e1.currency == "Euro"  (experimental)
struct CurrencyCompare {
  int role = 0;
  CmpOp op = CmpOp::Eq;
  std::variant<int, std::string> rhs;
  friend bool operator==(const CurrencyCompare&, const CurrencyCompare&) = default;
};

using ConstraintExpr =
    std::variant<NodeCompare, EdgeIdentity, TimeCompare, AmountCompare, CurrencyCompare>;

struct Constraint {
  ConstraintKind kind = ConstraintKind::SkipIf;
  ConstraintExpr expr;
  SourcePos pos;
  friend bool operator==(const Constraint& a, const Constraint& b) {
    return a.kind == b.kind && a.expr == b.expr;
  }
};

struct StageSpec {
  StageOp op = StageOp::ForAll;
  std::vector<Operand> inputs;
  std::vector<Constraint> constraints;
  std::string output_var;
  WindowSide window = WindowSide::Backward;
  SourcePos pos;
  friend bool operator==(const StageSpec& a, const StageSpec& b) {
    return a.op == b.op && a.inputs == b.inputs && a.constraints == b.constraints &&
           a.output_var == b.output_var && a.window == b.window;
  }
};

struct EmissionRule {
  EmitMode mode = EmitMode::SetCardinality;
  std::int64_t min_size = 1;
  std::vector<std::string> targets;
  Multiplicity multiplicity = Multiplicity::Nodes;
  friend bool operator==(const EmissionRule&, const EmissionRule&) = default;
};

struct PatternSpec {
  std::string name;
  Timestamp delta = 0;
  std::vector<StageSpec> stages;
  EmissionRule emit;
  Attribution attribution = Attribution::Trigger;
  friend bool operator==(const PatternSpec& a, const PatternSpec& b) {
    return a.name == b.name && a.delta == b.delta && a.stages == b.stages && a.emit == b.emit &&
           a.attribution == b.attribution;
  }
};

struct ParseResult {
  std::optional<PatternSpec> spec;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return spec.has_value(); }
};

ParseResult parse_pattern(std::string_view text, std::string_view filename = "<input>");

// Canonical textual form; parse_pattern(print_pattern(p)) reproduces p.
std::string print_pattern(const PatternSpec& spec);

struct VarInfo {
  std::string name;
  bool scalar = true;  // trigger endpoints and for_all outputs bind one node at a time
  int stage = -1;      // -1 for N0/N1
};

struct RoleInfo {
  int stage = -1;  // -1 for the trigger edge e0
  int operand = -1;
  Direction direction = Direction::Out;
  WindowSide window = WindowSide::Backward;
  bool loop_bound = false;  // bound once per for_all iteration
  bool in_union = false;
};

struct ValidationResult;
class ValidatedPattern;
ValidationResult validate(const PatternSpec& spec);

// A PatternSpec that passed every validation rule, plus resolved symbol
// tables. Immutable once built.
class ValidatedPattern {
 public:
  const PatternSpec& spec() const noexcept { return spec_; }
  const std::vector<VarInfo>& vars() const noexcept { return vars_; }
  const std::vector<RoleInfo>& roles() const noexcept { return roles_; }
  const std::vector<int>& stage_order() const noexcept { return stage_order_; }
  // First role number of each stage's operands (roles are contiguous per stage).
  int first_role(int stage) const { return first_role_[static_cast<std::size_t>(stage)]; }
  const VarInfo* find_var(std::string_view name) const;
  // Role number of operand `operand` in `stage`, or -1 for set/self operands.
  int role_of(int stage, int operand) const;

 private:
  friend ValidationResult validate(const PatternSpec&);
  PatternSpec spec_;
  std::vector<VarInfo> vars_;
  std::vector<RoleInfo> roles_;
  std::vector<int> stage_order_;
  std::vector<int> first_role_;
  std::vector<std::vector<int>> operand_role_;
};

struct ValidationResult {
  std::optional<ValidatedPattern> pattern;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return pattern.has_value(); }
};

ValidationResult validate(const PatternSpec& spec);

// Parse + validate a document; diagnostics from whichever step failed.
ValidationResult load_pattern(std::string_view text, std::string_view filename = "<input>");
ValidationResult load_pattern_file(const std::filesystem::path& path);

std::string_view to_string(StageOp op);
std::string_view to_string(EmitMode mode);
std::string_view to_string(CmpOp op);
CmpOp flip(CmpOp op);     // a OP b  <=>  b flip(OP) a
bool holds(CmpOp op, std::int64_t a, std::int64_t b);

}  // namespace tempmine
