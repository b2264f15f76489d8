#include "tempmine/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace tempmine {

namespace {

struct Edge {
  EdgeId id;
  Timestamp t;
};

// A stage member: the node plus, per operand, the qualifying edges found for
// it (empty for .self operands).
struct Member {
  NodeId node;
  std::vector<std::vector<Edge>> per_operand;
};

struct StageValue {
  bool scalar = false;
  NodeId node = kNoNode;           // for_all binding
  std::vector<Member> members;     // set stages
  std::vector<Edge> loop_edges;    // for_all: qualifying edges per operand role
  std::vector<std::vector<Edge>> loop_per_operand;
};

class BruteForce {
 public:
  BruteForce(const TemporalGraph& g, const ValidatedPattern& p, Timestamp delta, Attribution attribution)
      : g_(g), p_(p), spec_(p.spec()), delta_(delta), attribution_(attribution), n_(g.node_count()) {
    between_.resize(static_cast<std::size_t>(n_) * n_);
    for (const auto& r : g.edges()) {
      if (r.src == r.dst) continue;
      between_[static_cast<std::size_t>(r.src) * n_ + r.dst].push_back(Edge{r.edge_id, r.timestamp});
    }
    counts_.assign(g.edge_count(), 0);
  }

  OracleResult run() {
    for (const auto& r : g_.edges()) {
      if (r.src == r.dst) continue;
      trigger_ = r;
      values_.assign(spec_.stages.size(), StageValue{});
      chosen_.assign(p_.roles().size(), Edge{kNoEdge, 0});
      chosen_[0] = Edge{r.edge_id, r.timestamp};
      stage(0);
    }
    OracleResult out;
    out.counts = std::move(counts_);
    out.instances = std::move(instances_);
    return out;
  }

 private:
  NodeId scalar(const std::string& name) const {
    if (name == "N0") return trigger_.src;
    if (name == "N1") return trigger_.dst;
    const auto* v = p_.find_var(name);
    return values_[static_cast<std::size_t>(v->stage)].node;
  }

  bool in_window(int role, Timestamp t) const {
    const Timestamp t0 = trigger_.timestamp;
    if (p_.roles()[static_cast<std::size_t>(role)].window == WindowSide::Forward) return t0 <= t && t <= t0 + delta_;
    return t0 - delta_ <= t && t <= t0;
  }

  // Every edge that may play `role` between the operand's base and `n`.
  std::vector<Edge> candidates_for(int si, int operand, NodeId n) const {
    const auto& st = spec_.stages[static_cast<std::size_t>(si)];
    const auto& o = st.inputs[static_cast<std::size_t>(operand)];
    const int role = p_.role_of(si, operand);
    const NodeId base = scalar(o.base);
    const NodeId from = o.accessor == Accessor::OutNeigh ? base : n;
    const NodeId to = o.accessor == Accessor::OutNeigh ? n : base;
    std::vector<Edge> out;
    if (from == to) return out;
    for (const Edge& e : between_[static_cast<std::size_t>(from) * n_ + to]) {
      if (!in_window(role, e.t)) continue;
      bool drop = false;
      for (const auto& c : st.constraints) {
        if (c.kind == ConstraintKind::Order) continue;
        if (const auto* tc = std::get_if<TimeCompare>(&c.expr)) {
          if (tc->lhs != role && tc->lhs != kAnyRole) continue;
          const Timestamp ref = tc->rhs ? chosen_[static_cast<std::size_t>(*tc->rhs)].t : trigger_.timestamp;
          if (holds(tc->op, e.t, ref)) drop = true;
        } else if (const auto* ei = std::get_if<EdgeIdentity>(&c.expr)) {
          if (ei->lhs != role) continue;
          const bool same = e.id == chosen_[static_cast<std::size_t>(ei->rhs)].id;
          if (ei->op == CmpOp::Eq ? same : !same) drop = true;
        } else if (const auto* ac = std::get_if<AmountCompare>(&c.expr)) {
          if (ac->role != role) continue;
          const double a = g_.edge(e.id).amount;
          const double b = ac->value;
          bool h = false;
          switch (ac->op) {
            case CmpOp::Eq: h = a == b; break;
            case CmpOp::Ne: h = a != b; break;
            case CmpOp::Lt: h = a < b; break;
            case CmpOp::Le: h = a <= b; break;
            case CmpOp::Gt: h = a > b; break;
            case CmpOp::Ge: h = a >= b; break;
          }
          if (h) drop = true;
        } else if (const auto* cc = std::get_if<CurrencyCompare>(&c.expr)) {
          if (cc->role != role) continue;
          const std::string& mine = g_.currencies().empty() ? std::string() : g_.currencies()[g_.edge(e.id).currency];
          std::string other;
          if (const auto* r = std::get_if<int>(&cc->rhs)) {
            const auto oid = chosen_[static_cast<std::size_t>(*r)].id;
            other = g_.currencies().empty() ? std::string() : g_.currencies()[g_.edge(oid).currency];
          } else {
            other = std::get<std::string>(cc->rhs);
          }
          // An unknown literal never equals a stored code.
          bool same = mine == other;
          if (std::holds_alternative<std::string>(cc->rhs) && g_.currencies().empty()) same = false;
          if (cc->op == CmpOp::Eq ? same : !same) drop = true;
        }
      }
      if (!drop) out.push_back(e);
    }
    return out;
  }

  // Latest edge for backward roles, earliest for forward ones; lower id on ties.
  Edge representative(int role, const std::vector<Edge>& edges) const {
    const bool forward = p_.roles()[static_cast<std::size_t>(role)].window == WindowSide::Forward;
    if (edges.empty()) return Edge{kNoEdge, 0};
    Edge best = edges.front();
    for (const Edge& e : edges) {
      const bool better = forward ? (e.t < best.t || (e.t == best.t && e.id < best.id))
                                  : (e.t > best.t || (e.t == best.t && e.id < best.id));
      if (better) best = e;
    }
    return best;
  }

  void stage(std::size_t si) {
    if (si == spec_.stages.size()) {
      emit();
      return;
    }
    const auto& st = spec_.stages[si];
    const int s = static_cast<int>(si);
    std::vector<Member> members;
    for (NodeId n = 0; n < n_; ++n) {
      Member m{n, {}};
      std::vector<bool> present;
      for (std::size_t j = 0; j < st.inputs.size(); ++j) {
        const auto& o = st.inputs[j];
        m.per_operand.emplace_back();
        if (o.accessor == Accessor::Self) {
          const auto* v = p_.find_var(o.base);
          if (v->scalar) {
            present.push_back(scalar(o.base) == n);
          } else {
            const auto& set = values_[static_cast<std::size_t>(v->stage)].members;
            present.push_back(std::any_of(set.begin(), set.end(), [&](const Member& x) { return x.node == n; }));
          }
        } else {
          m.per_operand.back() = candidates_for(s, static_cast<int>(j), n);
          present.push_back(!m.per_operand.back().empty());
        }
      }
      bool in = false;
      switch (st.op) {
        case StageOp::ForAll:
        case StageOp::Differentiate: in = present[0]; break;
        case StageOp::Intersect: in = std::all_of(present.begin(), present.end(), [](bool b) { return b; }); break;
        case StageOp::Union: in = std::any_of(present.begin(), present.end(), [](bool b) { return b; }); break;
      }
      if (!in) continue;
      bool keep = true;
      for (const auto& c : st.constraints) {
        if (const auto* nc = std::get_if<NodeCompare>(&c.expr)) {
          const NodeId a = nc->lhs == st.output_var ? n : scalar(nc->lhs);
          const NodeId b = nc->rhs == st.output_var ? n : scalar(nc->rhs);
          if ((a == b) == (nc->op == CmpOp::Eq)) keep = false;
        } else if (c.kind == ConstraintKind::Order) {
          const auto& tc = std::get<TimeCompare>(c.expr);
          const auto time_of = [&](int role) {
            const auto& info = p_.roles()[static_cast<std::size_t>(role)];
            if (info.stage == s) {
              return representative(role, m.per_operand[static_cast<std::size_t>(info.operand)]).t;
            }
            return chosen_[static_cast<std::size_t>(role)].t;
          };
          if (!holds(tc.op, time_of(tc.lhs), time_of(*tc.rhs))) keep = false;
        }
      }
      if (keep) members.push_back(std::move(m));
    }

    auto& val = values_[si];
    if (st.op != StageOp::ForAll) {
      val.scalar = false;
      val.members = std::move(members);
      stage(si + 1);
      return;
    }
    val.scalar = true;
    const int role = p_.role_of(s, 0);
    for (auto& m : members) {
      val.node = m.node;
      val.loop_per_operand = m.per_operand;
      if (role >= 0) chosen_[static_cast<std::size_t>(role)] = representative(role, m.per_operand[0]);
      stage(si + 1);
    }
    val.node = kNoNode;
  }

  // Edge choices of one member, as (role, options) groups.
  void member_groups(int stage_index, const Member& m, bool all_edges,
                     std::vector<std::pair<int, std::vector<Edge>>>& groups) const {
    for (std::size_t j = 0; j < m.per_operand.size(); ++j) {
      const int role = p_.role_of(stage_index, static_cast<int>(j));
      if (role < 0 || m.per_operand[j].empty()) continue;
      if (all_edges) {
        groups.emplace_back(role, m.per_operand[j]);
      } else {
        groups.emplace_back(role, std::vector<Edge>{representative(role, m.per_operand[j])});
      }
    }
  }

  std::vector<std::pair<int, std::vector<Edge>>> loop_groups(bool all_edges) const {
    std::vector<std::pair<int, std::vector<Edge>>> groups;
    for (std::size_t si = 0; si < spec_.stages.size(); ++si) {
      if (spec_.stages[si].op != StageOp::ForAll) continue;
      const int role = p_.role_of(static_cast<int>(si), 0);
      if (role < 0) continue;
      const auto& opts = values_[si].loop_per_operand[0];
      if (all_edges) {
        groups.emplace_back(role, opts);
      } else {
        groups.emplace_back(role, std::vector<Edge>{chosen_[static_cast<std::size_t>(role)]});
      }
    }
    return groups;
  }

  void instances(std::vector<std::pair<int, std::vector<Edge>>> groups, const std::vector<NodeId>& extra_nodes) {
    // Cartesian product over the groups, one edge per group.
    std::vector<std::size_t> idx(groups.size(), 0);
    for (const auto& grp : groups) {
      if (grp.second.empty()) return;
    }
    while (true) {
      std::set<EdgeId> members{trigger_.edge_id};
      bool anchored = true;
      for (std::size_t k = 0; k < groups.size(); ++k) {
        const Edge& e = groups[k].second[idx[k]];
        members.insert(e.id);
        const bool forward = p_.roles()[static_cast<std::size_t>(groups[k].first)].window == WindowSide::Forward;
        if (!forward && (e.t > trigger_.timestamp || (e.t == trigger_.timestamp && e.id > trigger_.edge_id))) {
          anchored = false;
        }
      }
      const bool members_mode = attribution_ == Attribution::Members;
      if (!members_mode) {
        ++counts_[trigger_.edge_id];
      } else if (anchored) {
        for (EdgeId x : members) ++counts_[x];
      }
      if (spec_.emit.mode == EmitMode::InstanceList && (!members_mode || anchored)) {
        InstanceRecord rec;
        rec.pattern = spec_.name;
        rec.trigger = trigger_.edge_id;
        rec.edges.assign(members.begin(), members.end());
        std::set<NodeId> nodes{trigger_.src, trigger_.dst};
        for (const auto& v : values_) {
          if (v.scalar && v.node != kNoNode) nodes.insert(v.node);
        }
        nodes.insert(extra_nodes.begin(), extra_nodes.end());
        rec.nodes.assign(nodes.begin(), nodes.end());
        instances_.push_back(std::move(rec));
      }
      std::size_t k = 0;
      while (k < groups.size() && ++idx[k] == groups[k].second.size()) idx[k++] = 0;
      if (k == groups.size()) break;
    }
  }

  void emit() {
    const auto& em = spec_.emit;
    const bool all_edges = em.multiplicity == Multiplicity::Edges;
    std::vector<int> stages;
    for (const auto& t : em.targets) stages.push_back(p_.find_var(t)->stage);
    const auto size_of = [&](int s) -> std::size_t {
      const auto& v = values_[static_cast<std::size_t>(s)];
      return v.scalar ? 1 : v.members.size();
    };
    for (int s : stages) {
      if (size_of(s) < static_cast<std::size_t>(em.min_size)) return;
    }
    // A scalar target contributes only its node; its edges are loop edges.
    const auto member_list = [&](int s) {
      const auto& v = values_[static_cast<std::size_t>(s)];
      if (v.scalar) return std::vector<const Member*>{nullptr};
      std::vector<const Member*> out;
      for (const auto& m : v.members) out.push_back(&m);
      return out;
    };
    switch (em.mode) {
      case EmitMode::SetCardinality:
        for (const Member* m : member_list(stages[0])) {
          auto groups = loop_groups(all_edges);
          std::vector<NodeId> extra;
          if (m != nullptr) {
            member_groups(stages[0], *m, all_edges, groups);
            extra.push_back(m->node);
          }
          instances(std::move(groups), extra);
        }
        break;
      case EmitMode::SourceCount:
      case EmitMode::InstanceList: {
        auto groups = loop_groups(all_edges);
        std::vector<NodeId> extra;
        for (const Member* m : member_list(stages[0])) {
          if (m == nullptr) continue;
          member_groups(stages[0], *m, false, groups);
          extra.push_back(m->node);
        }
        instances(std::move(groups), extra);
        break;
      }
      case EmitMode::PairProduct:
        for (const Member* a : member_list(stages[0])) {
          for (const Member* c : member_list(stages[1])) {
            auto groups = loop_groups(all_edges);
            std::vector<NodeId> extra;
            if (a != nullptr) {
              member_groups(stages[0], *a, all_edges, groups);
              extra.push_back(a->node);
            }
            if (c != nullptr) {
              member_groups(stages[1], *c, all_edges, groups);
              extra.push_back(c->node);
            }
            instances(std::move(groups), extra);
          }
        }
        break;
    }
  }

  const TemporalGraph& g_;
  const ValidatedPattern& p_;
  const PatternSpec& spec_;
  Timestamp delta_;
  Attribution attribution_;
  NodeId n_;
  std::vector<std::vector<Edge>> between_;
  TransactionRecord trigger_;
  std::vector<StageValue> values_;
  std::vector<Edge> chosen_;
  std::vector<Count> counts_;
  std::vector<InstanceRecord> instances_;
};

}  // namespace

OracleResult enumerate_bruteforce(const TemporalGraph& g, const ValidatedPattern& pattern,
                                  const OracleOptions& options) {
  if (!options.ignore_size_guard && g.node_count() > options.max_nodes) {
    throw ConfigError("oracle refuses a graph with " + std::to_string(g.node_count()) + " nodes (limit " +
                      std::to_string(options.max_nodes) + "); raise the limit explicitly to proceed");
  }
  const Timestamp delta = options.delta.value_or(pattern.spec().delta);
  if (delta < 0) throw ConfigError("delta must be non-negative");
  BruteForce bf(g, pattern, delta, options.attribution.value_or(pattern.spec().attribution));
  return bf.run();
}

OracleReport compare(std::string pattern, std::span<const Count> expected, std::span<const Count> actual) {
  if (expected.size() != actual.size()) {
    throw InvariantError("compare: " + std::to_string(expected.size()) + " expected rows vs " +
                         std::to_string(actual.size()) + " actual rows");
  }
  OracleReport r;
  r.pattern = std::move(pattern);
  r.expected.assign(expected.begin(), expected.end());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] != actual[i]) r.mismatches.push_back(Mismatch{static_cast<EdgeId>(i), expected[i], actual[i]});
  }
  return r;
}

std::string format_report(const OracleReport& report, std::size_t max_rows) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-20s %10s %12s %12s\n", "pattern", "edge", "expected", "actual");
  out += line;
  for (std::size_t i = 0; i < report.mismatches.size() && i < max_rows; ++i) {
    const auto& m = report.mismatches[i];
    std::snprintf(line, sizeof line, "%-20s %10u %12lld %12lld\n", report.pattern.c_str(), m.edge,
                  static_cast<long long>(m.expected), static_cast<long long>(m.actual));
    out += line;
  }
  if (report.mismatches.size() > max_rows) {
    out += "... " + std::to_string(report.mismatches.size() - max_rows) + " more\n";
  }
  out += report.pattern + ": " + std::to_string(report.expected.size()) + " edges, " +
         std::to_string(report.mismatches.size()) + " mismatches\n";
  return out;
}

}  // namespace tempmine
