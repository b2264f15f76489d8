#include <algorithm>

#include "tempmine/pattern.hpp"

namespace tempmine {

const VarInfo* ValidatedPattern::find_var(std::string_view name) const {
  for (const auto& v : vars_) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

int ValidatedPattern::role_of(int stage, int operand) const {
  return operand_role_[static_cast<std::size_t>(stage)][static_cast<std::size_t>(operand)];
}

namespace {

bool reserved_name(std::string_view name) {
  if (name == "t" || name == "e") return true;
  if (name.size() >= 2 && name[0] == 'e' &&
      std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return true;
  }
  return false;
}

class Validator {
 public:
  explicit Validator(const PatternSpec& spec) : spec_(spec) {}

  bool run();

  std::vector<Diagnostic> diags_;
  std::vector<VarInfo> vars_;
  std::vector<RoleInfo> roles_;
  std::vector<int> first_role_;
  std::vector<std::vector<int>> operand_role_;

 private:
  void diag(SourcePos pos, int stage, std::string msg) {
    diags_.push_back(Diagnostic{{}, pos, stage, std::move(msg)});
  }
  const VarInfo* lookup(std::string_view name) const {
    for (const auto& v : vars_) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }
  bool role_exists(int r) const { return r >= 0 && static_cast<std::size_t>(r) < roles_.size(); }
  // e0 or a role bound by an earlier for_all stage.
  bool outer_role(int r, int stage) const {
    return role_exists(r) && (r == 0 || (roles_[r].loop_bound && roles_[r].stage < stage));
  }
  bool own_role(int r, int stage) const { return role_exists(r) && roles_[r].stage == stage; }
  void check_constraint(const Constraint& c, int si, const StageSpec& st, bool has_roles);

  const PatternSpec& spec_;
};

void Validator::check_constraint(const Constraint& c, int si, const StageSpec& st, bool has_roles) {
  const auto undefined_edge = [&](int r) {
    diag(c.pos, si, "undefined edge e" + std::to_string(r));
  };
  const auto check_node = [&](const std::string& name) {
    if (name == st.output_var) return true;
    const auto* v = lookup(name);
    if (v == nullptr) {
      diag(c.pos, si, "undefined operand " + name);
      return false;
    }
    if (!v->scalar) {
      diag(c.pos, si, "node comparison on set variable " + name);
      return false;
    }
    return true;
  };
  const auto check_own = [&](int r, const char* what) {
    if (r == kAnyRole) {
      diag(c.pos, si, std::string("bare 'e' is only allowed in break_if"));
      return false;
    }
    if (!role_exists(r)) {
      undefined_edge(r);
      return false;
    }
    if (!own_role(r, si)) {
      diag(c.pos, si, std::string(what) + " must filter an edge of this stage; e" + std::to_string(r) +
                          " belongs to " + (r == 0 ? std::string("the trigger") : "stage " + std::to_string(roles_[r].stage + 1)));
      return false;
    }
    return true;
  };
  const auto check_outer = [&](int r) {
    if (!role_exists(r)) {
      undefined_edge(r);
      return false;
    }
    if (!outer_role(r, si)) {
      diag(c.pos, si, "e" + std::to_string(r) +
                          " is not bound here; reference e0 or edges of earlier for_all stages");
      return false;
    }
    return true;
  };

  switch (c.kind) {
    case ConstraintKind::SkipIf:
      std::visit(
          [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, NodeCompare>) {
              if (e.op != CmpOp::Eq && e.op != CmpOp::Ne) diag(c.pos, si, "node comparisons use == or !=");
              check_node(e.lhs);
              check_node(e.rhs);
            } else if constexpr (std::is_same_v<T, EdgeIdentity>) {
              if (e.op != CmpOp::Eq && e.op != CmpOp::Ne) diag(c.pos, si, "edge identity uses == or !=");
              if (check_own(e.lhs, "skip_if")) check_outer(e.rhs);
            } else if constexpr (std::is_same_v<T, AmountCompare>) {
              check_own(e.role, "skip_if");
            } else if constexpr (std::is_same_v<T, CurrencyCompare>) {
              if (e.op != CmpOp::Eq && e.op != CmpOp::Ne) diag(c.pos, si, "currency comparisons use == or !=");
              if (check_own(e.role, "skip_if") && std::holds_alternative<int>(e.rhs)) check_outer(std::get<int>(e.rhs));
            } else {
              diag(c.pos, si, "time comparisons belong in break_if or order, not skip_if");
            }
          },
          c.expr);
      break;
    case ConstraintKind::BreakIf: {
      const auto* tc = std::get_if<TimeCompare>(&c.expr);
      if (tc == nullptr) {
        diag(c.pos, si, "break_if takes a time bound such as 'e.t > t'");
        break;
      }
      if (tc->op != CmpOp::Gt && tc->op != CmpOp::Ge) {
        diag(c.pos, si, "break_if must be an upper time bound ('>' or '>=') over sorted iteration");
        break;
      }
      if (tc->lhs == kAnyRole) {
        if (!has_roles) diag(c.pos, si, "break_if needs an in_neigh/out_neigh operand to iterate");
      } else {
        check_own(tc->lhs, "break_if");
      }
      if (tc->rhs) check_outer(*tc->rhs);
      break;
    }
    case ConstraintKind::Order: {
      const auto* tc = std::get_if<TimeCompare>(&c.expr);
      if (tc == nullptr || !tc->rhs) {
        diag(c.pos, si, "order relates two edges, e.g. 'e1.t <= e2.t'");
        break;
      }
      for (int r : {tc->lhs, *tc->rhs}) {
        if (r == kAnyRole) {
          diag(c.pos, si, "bare 'e' is only allowed in break_if");
        } else if (!role_exists(r)) {
          undefined_edge(r);
        } else if (own_role(r, si)) {
          if (roles_[r].in_union) diag(c.pos, si, "order cannot reference union operand e" + std::to_string(r));
        } else if (!outer_role(r, si)) {
          diag(c.pos, si, "order references e" + std::to_string(r) +
                              ", which is not bound yet");
        }
      }
      break;
    }
  }
}

bool Validator::run() {
  if (spec_.name.empty()) diag({}, -1, "pattern name is empty");
  if (spec_.delta <= 0) diag({}, -1, "delta must be positive");
  if (spec_.stages.empty()) diag({}, -1, "pattern has no stages");

  vars_.push_back(VarInfo{"N0", true, -1});
  vars_.push_back(VarInfo{"N1", true, -1});
  roles_.push_back(RoleInfo{});  // e0

  for (std::size_t i = 0; i < spec_.stages.size(); ++i) {
    const int si = static_cast<int>(i);
    const auto& st = spec_.stages[i];
    first_role_.push_back(static_cast<int>(roles_.size()));
    operand_role_.emplace_back();

    const std::size_t n = st.inputs.size();
    const bool single = st.op == StageOp::ForAll || st.op == StageOp::Differentiate;
    if (single && n != 1) {
      diag(st.pos, si, std::string(to_string(st.op)) + " takes exactly one operand, got " + std::to_string(n));
    } else if (!single && n < 2) {
      diag(st.pos, si, std::string(to_string(st.op)) + " needs at least two operands, got " + std::to_string(n));
    }

    bool has_roles = false;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& o = st.inputs[j];
      int role = -1;
      const auto* v = lookup(o.base);
      if (v == nullptr) {
        diag(st.pos, si, "undefined operand " + o.base);
      } else if (o.accessor != Accessor::Self) {
        if (!v->scalar) {
          diag(st.pos, si, "neighbor accessor on set variable " + o.base +
                               "; iterate it with for_all " + o.base + ".self first");
        }
        role = static_cast<int>(roles_.size());
        roles_.push_back(RoleInfo{si, static_cast<int>(j),
                                  o.accessor == Accessor::InNeigh ? Direction::In : Direction::Out,
                                  st.window, st.op == StageOp::ForAll, st.op == StageOp::Union});
        has_roles = true;
      }
      operand_role_.back().push_back(role);
    }

    for (const auto& c : st.constraints) check_constraint(c, si, st, has_roles);

    if (st.output_var.empty()) {
      diag(st.pos, si, "stage has no output variable");
    } else if (reserved_name(st.output_var)) {
      diag(st.pos, si, "'" + st.output_var + "' is reserved for edges/time and cannot name a node variable");
    } else if (lookup(st.output_var) != nullptr) {
      diag(st.pos, si, "duplicate output variable " + st.output_var);
    } else {
      vars_.push_back(VarInfo{st.output_var, st.op == StageOp::ForAll, si});
    }
  }

  const auto& em = spec_.emit;
  const std::size_t want = em.mode == EmitMode::PairProduct ? 2 : 1;
  if (em.targets.size() != want) {
    diag({}, -1, std::string(to_string(em.mode)) + " expects " + std::to_string(want) + " target(s), got " +
                     std::to_string(em.targets.size()));
  }
  for (const auto& t : em.targets) {
    const auto* v = lookup(t);
    if (v == nullptr || v->stage < 0) {
      diag({}, -1, "emit target " + t + " is not a stage output");
      continue;
    }
    if (em.multiplicity == Multiplicity::Edges && spec_.stages[static_cast<std::size_t>(v->stage)].op == StageOp::Union) {
      diag({}, -1, "edge multiplicity is undefined for union output " + t);
    }
  }
  if (em.min_size < 1) diag({}, -1, "min_size must be at least 1");
  if (em.multiplicity == Multiplicity::Edges &&
      (em.mode == EmitMode::SourceCount || em.mode == EmitMode::InstanceList)) {
    diag({}, -1, std::string("edge multiplicity is not supported with ") + std::string(to_string(em.mode)));
  }

  return diags_.empty();
}

}  // namespace

ValidationResult validate(const PatternSpec& spec) {
  Validator v(spec);
  ValidationResult out;
  if (!v.run()) {
    out.diagnostics = std::move(v.diags_);
    return out;
  }
  ValidatedPattern vp;
  vp.spec_ = spec;
  vp.vars_ = std::move(v.vars_);
  vp.roles_ = std::move(v.roles_);
  vp.first_role_ = std::move(v.first_role_);
  vp.operand_role_ = std::move(v.operand_role_);
  vp.stage_order_.resize(spec.stages.size());
  for (std::size_t i = 0; i < spec.stages.size(); ++i) vp.stage_order_[i] = static_cast<int>(i);
  out.pattern = std::move(vp);
  return out;
}

}  // namespace tempmine
