#include "tempmine/plan.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tempmine {

std::string hint_name(const KernelMatch& m) {
  switch (m.hint) {
    case KernelHint::Generic: return "GENERIC";
    case KernelHint::Fan: return "FAN";
    case KernelHint::Degree: return "DEGREE";
    case KernelHint::Cycle: return "CYCLE_" + std::to_string(m.params.cycle_length);
    case KernelHint::ScatterGather: return "SCATTER_GATHER";
    case KernelHint::Stack: return "STACK";
  }
  return "?";
}

namespace {

constexpr double kUnknownAdjacency = 1e9;

int scalar_register_of(const ValidatedPattern& p, const std::string& name) {
  if (name == "N0") return kTriggerSrc;
  if (name == "N1") return kTriggerDst;
  const auto* v = p.find_var(name);
  if (v == nullptr || !v->scalar || v->stage < 0) {
    throw InvariantError("compiler: '" + name + "' is not a bound scalar");
  }
  return scalar_register(v->stage);
}

// Static size estimate of a stage's output set.
double stage_estimate(const ValidatedPattern& p, int stage, const std::optional<GraphStats>& stats,
                      std::vector<double>& memo) {
  auto& slot = memo[static_cast<std::size_t>(stage)];
  if (slot >= 0) return slot;
  const auto& st = p.spec().stages[static_cast<std::size_t>(stage)];
  std::vector<double> parts;
  for (const auto& o : st.inputs) {
    const auto* v = p.find_var(o.base);
    if (o.accessor == Accessor::Self) {
      parts.push_back(v->scalar ? 1.0 : stage_estimate(p, v->stage, stats, memo));
    } else {
      const auto d = o.accessor == Accessor::InNeigh ? Direction::In : Direction::Out;
      parts.push_back(stats ? stats->mean(d) : kUnknownAdjacency);
    }
  }
  double est = 0.0;
  if (st.op == StageOp::Union) {
    for (double x : parts) est += x;
  } else {
    est = *std::min_element(parts.begin(), parts.end());
  }
  slot = est;
  return est;
}

std::string role_label(int r) { return r == kAnyRole ? std::string("e") : "e" + std::to_string(r); }

std::string register_label(int reg) {
  if (reg == kCandidate) return "cand";
  if (reg == kTriggerSrc) return "N0";
  if (reg == kTriggerDst) return "N1";
  return "v" + std::to_string(reg - 2);
}

std::string operand_label(const OperandRef& o) {
  switch (o.kind) {
    case OperandRef::Kind::Adjacency:
      return register_label(o.var) + (o.direction == Direction::In ? ".in" : ".out") + "[" +
             role_label(o.role) + "]";
    case OperandRef::Kind::Set: return "slot" + std::to_string(o.var);
    case OperandRef::Kind::Scalar: return register_label(o.var) + ".self";
  }
  return "?";
}

}  // namespace

std::vector<OperandRef> order_intersection(std::vector<OperandRef> operands,
                                           const std::optional<GraphStats>& stats) {
  // Without stats every adjacency list carries the same placeholder estimate,
  // so sets and scalars sort ahead of them and adjacency keeps source order.
  if (stats) {
    for (auto& o : operands) {
      if (o.kind == OperandRef::Kind::Adjacency) o.estimate = stats->mean(o.direction);
    }
  }
  std::stable_sort(operands.begin(), operands.end(),
                   [](const OperandRef& a, const OperandRef& b) { return a.estimate < b.estimate; });
  return operands;
}

ExecutionPlan compile(const ValidatedPattern& pattern, const std::optional<GraphStats>& stats,
                      const CompileOptions& options) {
  const auto& spec = pattern.spec();
  ExecutionPlan plan;
  plan.name = spec.name;
  plan.delta = options.delta_override.value_or(spec.delta);
  if (plan.delta < 0) throw ConfigError("delta for " + spec.name + " must be non-negative");
  plan.attribution = options.attribution_override.value_or(spec.attribution);
  plan.slot_count = static_cast<int>(spec.stages.size());

  const auto& roles = pattern.roles();
  plan.role_count = static_cast<int>(roles.size());
  for (const auto& r : roles) {
    plan.role_stage.push_back(r.stage);
    plan.role_window.push_back(r.window);
  }

  std::vector<double> memo(spec.stages.size(), -1.0);
  for (int si : pattern.stage_order()) {
    const auto& st = spec.stages[static_cast<std::size_t>(si)];
    LoopCell cell;
    cell.op = st.op;
    cell.dst_slot = si;
    cell.scalar_output = st.op == StageOp::ForAll;
    cell.first_role = pattern.first_role(si);
    cell.window = st.window;
    if (st.window == WindowSide::Backward) {
      cell.window_lo = -plan.delta;
      cell.window_hi = 0;
    } else {
      cell.window_lo = 0;
      cell.window_hi = plan.delta;
    }

    for (std::size_t j = 0; j < st.inputs.size(); ++j) {
      const auto& o = st.inputs[j];
      const auto* v = pattern.find_var(o.base);
      if (v == nullptr) throw InvariantError("compiler: unbound operand " + o.base);
      OperandRef ref;
      ref.index = static_cast<int>(j);
      if (o.accessor == Accessor::Self) {
        if (v->scalar) {
          ref.kind = OperandRef::Kind::Scalar;
          ref.var = scalar_register_of(pattern, o.base);
          ref.estimate = 1.0;
        } else {
          ref.kind = OperandRef::Kind::Set;
          ref.var = v->stage;
          ref.estimate = stage_estimate(pattern, v->stage, stats, memo);
        }
      } else {
        ref.kind = OperandRef::Kind::Adjacency;
        ref.direction = o.accessor == Accessor::InNeigh ? Direction::In : Direction::Out;
        ref.var = scalar_register_of(pattern, o.base);
        ref.role = pattern.role_of(si, static_cast<int>(j));
        ref.estimate = kUnknownAdjacency;
        ++cell.role_count;
      }
      cell.src.push_back(ref);
    }
    if (st.op == StageOp::Intersect) cell.src = order_intersection(std::move(cell.src), stats);

    const auto node_reg = [&](const std::string& name) {
      return name == st.output_var ? kCandidate : scalar_register_of(pattern, name);
    };
    for (const auto& c : st.constraints) {
      std::visit(
          [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, NodeCompare>) {
              cell.skip_preds.push_back(NodePred{node_reg(e.lhs), node_reg(e.rhs), e.op == CmpOp::Eq});
            } else if constexpr (std::is_same_v<T, EdgeIdentity>) {
              EdgeFilter f;
              f.kind = EdgeFilter::Kind::Identity;
              f.role = e.lhs;
              f.op = e.op;
              f.other_role = e.rhs;
              cell.edge_filters.push_back(f);
            } else if constexpr (std::is_same_v<T, AmountCompare>) {
              EdgeFilter f;
              f.kind = EdgeFilter::Kind::Amount;
              f.role = e.role;
              f.op = e.op;
              f.value = e.value;
              cell.edge_filters.push_back(f);
            } else if constexpr (std::is_same_v<T, CurrencyCompare>) {
              EdgeFilter f;
              f.kind = EdgeFilter::Kind::Currency;
              f.role = e.role;
              f.op = e.op;
              if (const auto* r = std::get_if<int>(&e.rhs)) {
                f.other_role = *r;
              } else {
                f.literal = std::get<std::string>(e.rhs);
              }
              cell.edge_filters.push_back(f);
            } else if constexpr (std::is_same_v<T, TimeCompare>) {
              if (c.kind == ConstraintKind::BreakIf) {
                cell.break_preds.push_back(
                    TimeBound{e.lhs, e.rhs.value_or(-1), e.op == CmpOp::Ge ? Timestamp{-1} : Timestamp{0}});
              } else if (c.kind == ConstraintKind::Order) {
                if (!e.rhs) throw InvariantError("compiler: order constraint without a second edge");
                cell.order_preds.push_back(OrderPred{e.lhs, e.op, *e.rhs});
              } else {
                throw InvariantError("compiler: time comparison in skip_if");
              }
            }
          },
          c.expr);
    }
    if (cell.op == StageOp::ForAll) {
      for (int r = cell.first_role; r < cell.first_role + cell.role_count; ++r) plan.loop_roles.push_back(r);
    }
    plan.cells.push_back(std::move(cell));
  }

  const auto& em = spec.emit;
  plan.emission.mode = em.mode;
  plan.emission.min_size = em.min_size;
  plan.emission.multiplicity = em.multiplicity;
  for (const auto& t : em.targets) {
    const auto* v = pattern.find_var(t);
    if (v == nullptr || v->stage < 0) throw InvariantError("compiler: emit target " + t + " unbound");
    plan.emission.targets.push_back(v->stage);
  }

  if (!options.force_generic) plan.kernel = lower_builtin(pattern);
  return plan;
}

// ---- builtin signature matching -------------------------------------------

namespace {

// Name-insensitive rendering of a pattern's structure. Stage outputs become
// V<stage>, roles become r<stage>.<k> where k is the operand's rank after
// sorting the stage's operands by shape, so that operand order and variable
// names do not affect the result.
std::string canonical_signature(const ValidatedPattern& p, bool with_min_size) {
  const auto& spec = p.spec();
  const auto var_name = [&](const std::string& name) -> std::string {
    if (name == "N0" || name == "N1") return name;
    const auto* v = p.find_var(name);
    return v == nullptr ? "?" : "V" + std::to_string(v->stage);
  };
  std::map<int, std::string> role_names{{0, "e0"}, {kAnyRole, "e"}};
  std::vector<std::vector<std::string>> operand_shapes(spec.stages.size());
  for (std::size_t si = 0; si < spec.stages.size(); ++si) {
    const auto& st = spec.stages[si];
    std::vector<std::pair<std::string, int>> shapes;
    for (std::size_t j = 0; j < st.inputs.size(); ++j) {
      const auto& o = st.inputs[j];
      const char* acc = o.accessor == Accessor::InNeigh    ? ".in"
                        : o.accessor == Accessor::OutNeigh ? ".out"
                                                           : ".self";
      shapes.emplace_back(var_name(o.base) + acc, static_cast<int>(j));
    }
    std::stable_sort(shapes.begin(), shapes.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      const int role = p.role_of(static_cast<int>(si), shapes[k].second);
      if (role >= 0) role_names[role] = "r" + std::to_string(si) + "." + std::to_string(k);
      operand_shapes[si].push_back(shapes[k].first);
    }
  }
  const auto role = [&](int r) {
    const auto it = role_names.find(r);
    return it == role_names.end() ? std::string("r?") : it->second;
  };

  std::ostringstream out;
  for (std::size_t si = 0; si < spec.stages.size(); ++si) {
    const auto& st = spec.stages[si];
    out << to_string(st.op) << (st.window == WindowSide::Forward ? " fwd" : "") << " (";
    for (const auto& s : operand_shapes[si]) out << s << ' ';
    out << ")";
    std::vector<std::string> cons;
    for (const auto& c : st.constraints) {
      std::string text = c.kind == ConstraintKind::SkipIf    ? "skip "
                         : c.kind == ConstraintKind::BreakIf ? "break "
                                                             : "order ";
      std::visit(
          [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, NodeCompare>) {
              std::string a = var_name(e.lhs), b = var_name(e.rhs);
              if (b < a) std::swap(a, b);
              text += a + std::string(to_string(e.op)) + b;
            } else if constexpr (std::is_same_v<T, EdgeIdentity>) {
              text += role(e.lhs) + std::string(to_string(e.op)) + role(e.rhs);
            } else if constexpr (std::is_same_v<T, TimeCompare>) {
              std::string a = role(e.lhs) + ".t", b = e.rhs ? role(*e.rhs) + ".t" : std::string("t");
              CmpOp op = e.op;
              if (c.kind == ConstraintKind::Order && (op == CmpOp::Gt || op == CmpOp::Ge)) {
                std::swap(a, b);
                op = flip(op);
              }
              text += a + std::string(to_string(op)) + b;
            } else if constexpr (std::is_same_v<T, AmountCompare>) {
              text += "amount";  // never part of a builtin signature
              text += role(e.role);
            } else {
              text += "currency";
              text += role(e.role);
            }
          },
          c.expr);
      cons.push_back(std::move(text));
    }
    std::sort(cons.begin(), cons.end());
    for (const auto& c : cons) out << " [" << c << "]";
    out << "\n";
  }
  out << "emit " << to_string(spec.emit.mode);
  for (const auto& t : spec.emit.targets) out << ' ' << var_name(t);
  if (with_min_size) out << " k" << spec.emit.min_size;
  out << (spec.emit.multiplicity == Multiplicity::Edges ? " edges" : " nodes") << "\n";
  return out.str();
}

struct Template {
  std::string signature;
  bool generic_min_size = false;  // kernel honours min_size itself
  KernelMatch match;
};

std::string stage_text(const char* op, const std::string& src, const char* dst,
                       const std::vector<std::string>& extra = {}) {
  std::string s = std::string("  - op: ") + op + "\n    src: " + src + "\n    dst_var: " + dst + "\n";
  for (const auto& e : extra) s += "    " + e + "\n";
  return s;
}

std::string emit_text(const char* mode, const char* target, bool edges) {
  return std::string("emit:\n  mode: ") + mode + "\n  target: " + target +
         "\n  multiplicity: " + (edges ? "edges" : "nodes") + "\n";
}

void add_template(std::vector<Template>& out, const std::string& body, bool generic_min_size,
                  KernelMatch match) {
  const auto loaded = load_pattern("pattern: tpl\ndelta: 1\nstages:\n" + body, "<builtin-template>");
  if (!loaded.ok()) {
    throw InvariantError("builtin template failed to validate: " + loaded.diagnostics.front().to_string());
  }
  out.push_back(Template{canonical_signature(*loaded.pattern, !generic_min_size), generic_min_size, match});
}

std::vector<Template> build_templates() {
  std::vector<Template> t;
  for (const auto dir : {Direction::In, Direction::Out}) {
    KernelMatch m{KernelHint::Fan, {}};
    m.params.direction = dir;
    const std::string src = dir == Direction::In ? "N1.in_neigh" : "N0.out_neigh";
    add_template(t, stage_text("differentiate", src, "F", {"skip_if: e1 == e0"}) +
                        emit_text("set_cardinality", "F", true),
                 false, m);
  }
  for (const auto ep : {Endpoint::Src, Endpoint::Dst}) {
    for (const auto dir : {Direction::In, Direction::Out}) {
      KernelMatch m{KernelHint::Degree, {}};
      m.params.direction = dir;
      m.params.endpoint = ep;
      const std::string src = std::string(ep == Endpoint::Src ? "N0" : "N1") +
                              (dir == Direction::In ? ".in_neigh" : ".out_neigh");
      add_template(t, stage_text("differentiate", src, "D") + emit_text("set_cardinality", "D", true), false, m);
    }
  }
  for (const bool edges : {false, true}) {
    KernelMatch m{KernelHint::Cycle, {}};
    m.params.edge_tuples = edges;
    m.params.cycle_length = 2;
    add_template(t, stage_text("intersect", "N1.out_neigh, N0.self", "C") +
                        emit_text("set_cardinality", "C", edges),
                 false, m);
    for (const bool ordered : {false, true}) {
      m.params.ordered = ordered;
      m.params.cycle_length = 3;
      std::vector<std::string> extra;
      if (ordered) extra.push_back("order: e1.t <= e2.t");
      add_template(t, stage_text("intersect", "N1.out_neigh, N0.in_neigh", "C", extra) +
                          emit_text("set_cardinality", "C", edges),
                   false, m);
      m.params.cycle_length = 4;
      std::vector<std::string> extra4{"skip_if: B == N1"};
      if (ordered) {
        extra4.push_back("order: e1.t <= e2.t");
        extra4.push_back("order: e2.t <= e3.t");
      }
      add_template(t, stage_text("for_all", "N1.out_neigh", "A", {"skip_if: A == N0"}) +
                          stage_text("intersect", "A.out_neigh, N0.in_neigh", "B", extra4) +
                          emit_text("set_cardinality", "B", edges),
                   false, m);
    }
  }
  for (const bool ordered : {false, true}) {
    KernelMatch m{KernelHint::ScatterGather, {}};
    m.params.ordered = ordered;
    std::vector<std::string> extra;
    if (ordered) extra.push_back("order: e2.t <= e3.t");
    add_template(t, stage_text("for_all", "N0.in_neigh", "S", {"skip_if: S == N1"}) +
                        stage_text("intersect", "S.out_neigh, N1.in_neigh", "M", extra) +
                        emit_text("source_count", "M", false),
                 true, m);

    KernelMatch s{KernelHint::Stack, {}};
    s.params.ordered = ordered;
    std::vector<std::string> second{"skip_if: C == N0"};
    if (ordered) second.push_back("window: forward");
    add_template(t, stage_text("differentiate", "N0.in_neigh", "A", {"skip_if: A == N1"}) +
                        stage_text("differentiate", "N1.out_neigh", "C", second) +
                        emit_text("pair_product", "A, C", false),
                 true, s);
  }
  return t;
}

const std::vector<Template>& templates() {
  static const std::vector<Template> table = build_templates();
  return table;
}

}  // namespace

KernelMatch lower_builtin(const ValidatedPattern& pattern) {
  const auto& table = templates();
  const std::string with_k = canonical_signature(pattern, true);
  const std::string without_k = canonical_signature(pattern, false);
  for (const auto& tpl : table) {
    if (tpl.signature == (tpl.generic_min_size ? without_k : with_k)) {
      KernelMatch m = tpl.match;
      m.params.min_size = pattern.spec().emit.min_size;
      return m;
    }
  }
  return {};
}

std::string dump_plan(const ExecutionPlan& plan) {
  std::ostringstream out;
  out << "plan " << plan.name << "\n";
  out << "  delta " << plan.delta << "\n";
  out << "  attribution " << (plan.attribution == Attribution::Trigger ? "trigger" : "members") << "\n";
  out << "  kernel " << hint_name(plan.kernel);
  if (plan.kernel.hint != KernelHint::Generic) {
    const auto& k = plan.kernel.params;
    out << " dir=" << (k.direction == Direction::In ? "in" : "out")
        << " endpoint=" << (k.endpoint == Endpoint::Src ? "src" : "dst") << " ordered=" << k.ordered
        << " edge_tuples=" << k.edge_tuples << " k=" << k.min_size;
  }
  out << "\n  slots " << plan.slot_count << "\n  roles " << plan.role_count << "\n";
  for (std::size_t i = 0; i < plan.cells.size(); ++i) {
    const auto& c = plan.cells[i];
    out << "  cell " << i << " " << to_string(c.op) << " -> "
        << (c.scalar_output ? register_label(scalar_register(c.dst_slot)) : "slot" + std::to_string(c.dst_slot))
        << "\n";
    out << "    window [t" << (c.window_lo < 0 ? "" : "+") << c.window_lo << ", t+" << c.window_hi << "]\n";
    out << "    src";
    for (const auto& s : c.src) out << " " << operand_label(s);
    out << "\n";
    for (const auto& p : c.skip_preds) {
      out << "    skip " << register_label(p.lhs) << (p.equal ? " == " : " != ") << register_label(p.rhs) << "\n";
    }
    for (const auto& f : c.edge_filters) {
      out << "    filter " << role_label(f.role);
      switch (f.kind) {
        case EdgeFilter::Kind::Identity: out << " " << to_string(f.op) << " " << role_label(f.other_role); break;
        case EdgeFilter::Kind::Amount: out << ".amount " << to_string(f.op) << " " << f.value; break;
        case EdgeFilter::Kind::Currency:
          out << ".currency " << to_string(f.op) << " "
              << (f.other_role >= 0 ? role_label(f.other_role) + ".currency" : "\"" + f.literal + "\"");
          break;
      }
      out << "\n";
    }
    for (const auto& b : c.break_preds) {
      out << "    break " << role_label(b.role) << ".t > "
          << (b.ref_role < 0 ? std::string("t") : role_label(b.ref_role) + ".t");
      if (b.offset != 0) out << " " << b.offset;
      out << "\n";
    }
    for (const auto& o : c.order_preds) {
      out << "    order " << role_label(o.lhs) << ".t " << to_string(o.op) << " " << role_label(o.rhs) << ".t\n";
    }
  }
  const auto& em = plan.emission;
  out << "  emit " << to_string(em.mode) << " k=" << em.min_size
      << (em.multiplicity == Multiplicity::Edges ? " edges" : " nodes");
  for (int t : em.targets) out << " slot" << t;
  out << "\n";
  return out.str();
}

}  // namespace tempmine
