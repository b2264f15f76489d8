#include <algorithm>

#include "engine_internal.hpp"

namespace tempmine {

void Bindings::reset(const ExecutionPlan& plan, const TemporalGraph& g, EdgeId e) {
  const auto& rec = g.edge(e);
  trigger = e;
  t = rec.timestamp;
  registers.assign(2 + plan.cells.size(), kNoNode);
  registers[kTriggerSrc] = rec.src;
  registers[kTriggerDst] = rec.dst;
  if (slots.size() < static_cast<std::size_t>(plan.slot_count)) slots.resize(static_cast<std::size_t>(plan.slot_count));
  const auto roles = static_cast<std::size_t>(plan.role_count);
  bound.assign(roles, RoleHit{});
  bound[0] = RoleHit{e, rec.timestamp, 1};
  role_base.assign(roles, kNoNode);
  role_window.assign(roles, TimeWindow{});
}

Scratch::Scratch(NodeId node_count) {
  for (int k = 0; k < kTables; ++k) {
    stamp_[k].assign(node_count, 0);
    index_[k].assign(node_count, 0);
  }
}

std::uint32_t Scratch::next(int k) {
  if (++gen_[k] == 0) {
    std::fill(stamp_[k].begin(), stamp_[k].end(), 0);
    gen_[k] = 1;
  }
  return gen_[k];
}

void intersect_sorted(std::span<const NodeId> a, std::span<const NodeId> b,
                      std::vector<std::pair<std::uint32_t, std::uint32_t>>& out) {
  out.clear();
  if (a.empty() || b.empty()) return;
  const bool swapped = a.size() > b.size();
  const auto small = swapped ? b : a;
  const auto large = swapped ? a : b;
  const auto emit = [&](std::size_t i, std::size_t j) {
    if (swapped) {
      out.emplace_back(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i));
    } else {
      out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  };
  if (large.size() < 32 * small.size()) {
    std::size_t i = 0, j = 0;
    while (i < small.size() && j < large.size()) {
      if (small[i] < large[j]) {
        ++i;
      } else if (large[j] < small[i]) {
        ++j;
      } else {
        emit(i++, j++);
      }
    }
    return;
  }
  std::size_t lo = 0;
  for (std::size_t i = 0; i < small.size() && lo < large.size(); ++i) {
    // Gallop to bracket small[i], then binary search inside the bracket.
    std::size_t step = 1, hi = lo;
    while (hi < large.size() && large[hi] < small[i]) {
      lo = hi + 1;
      hi += step;
      step *= 2;
    }
    hi = std::min(hi + 1, large.size());
    const auto it = std::lower_bound(large.begin() + static_cast<std::ptrdiff_t>(lo),
                                     large.begin() + static_cast<std::ptrdiff_t>(hi), small[i]);
    lo = static_cast<std::size_t>(it - large.begin());
    if (lo < large.size() && large[lo] == small[i]) emit(i, lo++);
  }
}

std::vector<NodeId> intersect_sorted(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> idx;
  intersect_sorted(a, b, idx);
  std::vector<NodeId> out;
  out.reserve(idx.size());
  for (const auto& [i, j] : idx) out.push_back(a[i]);
  return out;
}

namespace {

bool amount_holds(CmpOp op, double a, double b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

// True when the edge survives every skip_if filter on `role`.
bool edge_passes(const LoopCell& cell, int role, EdgeId e, const Bindings& b, const TemporalGraph& g) {
  for (const auto& f : cell.edge_filters) {
    if (f.role != role) continue;
    bool skip = false;
    switch (f.kind) {
      case EdgeFilter::Kind::Identity: {
        const bool same = e == b.bound[static_cast<std::size_t>(f.other_role)].rep;
        skip = f.op == CmpOp::Eq ? same : !same;
        break;
      }
      case EdgeFilter::Kind::Amount:
        skip = amount_holds(f.op, g.edge(e).amount, f.value);
        break;
      case EdgeFilter::Kind::Currency: {
        bool same = false;
        if (f.other_role >= 0) {
          same = g.edge(e).currency == g.edge(b.bound[static_cast<std::size_t>(f.other_role)].rep).currency;
        } else {
          const auto id = g.find_currency(f.literal);
          same = id && *id == g.edge(e).currency;
        }
        skip = f.op == CmpOp::Eq ? same : !same;
        break;
      }
    }
    if (skip) return false;
  }
  return true;
}

// Operand as seen by the combine step. Adjacency operands own one role.
struct View {
  std::span<const NodeId> nodes;
  const RoleHit* hits = nullptr;
  int local_role = -1;
};

void materialize(const OperandRef& op, const LoopCell& cell, Bindings& b, const TemporalGraph& g,
                 Scratch& scratch, NodeSet& s) {
  s.clear(1);
  const NodeId base = b.registers[static_cast<std::size_t>(op.var)];
  const auto r = static_cast<std::size_t>(op.role);
  b.role_base[r] = base;
  const TimeWindow w = b.role_window[r];
  if (base == kNoNode || w.lo > w.hi) return;
  const bool backward = cell.window == WindowSide::Backward;
  scratch.next(0);
  for (const auto& a : window_neighbors(g, base, op.direction, w)) {
    if (a.node == base) continue;
    if (!cell.edge_filters.empty() && !edge_passes(cell, op.role, a.edge, b, g)) continue;
    if (!scratch.marked(0, a.node)) {
      scratch.mark(0, a.node);
      scratch.slot(0, a.node) = static_cast<std::uint32_t>(s.nodes.size());
      s.nodes.push_back(a.node);
      s.hits.push_back(RoleHit{a.edge, a.t, 1});
      continue;
    }
    auto& h = s.hits[scratch.slot(0, a.node)];
    ++h.mult;
    if (backward && a.t > h.t) {
      h.rep = a.edge;
      h.t = a.t;
    }
  }
  if (std::is_sorted(s.nodes.begin(), s.nodes.end())) return;
  std::vector<std::uint32_t> perm(s.nodes.size());
  for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::uint32_t x, std::uint32_t y) { return s.nodes[x] < s.nodes[y]; });
  std::vector<NodeId> nodes(perm.size());
  std::vector<RoleHit> hits(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    nodes[i] = s.nodes[perm[i]];
    hits[i] = s.hits[perm[i]];
  }
  s.nodes = std::move(nodes);
  s.hits = std::move(hits);
}

}  // namespace

void execute_cell(const LoopCell& cell, const ExecutionPlan& plan, Bindings& b, const TemporalGraph& g,
                  Scratch& scratch, NodeSet& out) {
  (void)plan;
  const int nroles = cell.role_count;
  out.clear(nroles);

  for (int k = 0; k < nroles; ++k) {
    const int r = cell.first_role + k;
    TimeWindow w{b.t + cell.window_lo, b.t + cell.window_hi};
    for (const auto& bp : cell.break_preds) {
      if (bp.role != kAnyRole && bp.role != r) continue;
      const Timestamp ref = bp.ref_role < 0 ? b.t : b.bound[static_cast<std::size_t>(bp.ref_role)].t;
      w.hi = std::min(w.hi, ref + bp.offset);
    }
    b.role_window[static_cast<std::size_t>(r)] = w;
  }

  if (scratch.operands.size() < cell.src.size()) scratch.operands.resize(cell.src.size());
  std::vector<View> views(cell.src.size());
  std::vector<NodeId> scalars(cell.src.size());
  for (std::size_t i = 0; i < cell.src.size(); ++i) {
    const auto& op = cell.src[i];
    switch (op.kind) {
      case OperandRef::Kind::Adjacency: {
        auto& s = scratch.operands[i];
        materialize(op, cell, b, g, scratch, s);
        views[i] = View{s.nodes, s.hits.data(), op.role - cell.first_role};
        break;
      }
      case OperandRef::Kind::Set:
        views[i] = View{b.slots[static_cast<std::size_t>(op.var)].nodes, nullptr, -1};
        break;
      case OperandRef::Kind::Scalar:
        scalars[i] = b.registers[static_cast<std::size_t>(op.var)];
        views[i] = View{std::span<const NodeId>(&scalars[i], scalars[i] == kNoNode ? 0 : 1), nullptr, -1};
        break;
    }
  }

  // Candidate list with per-role hits, before node/order filtering.
  if (scratch.spare.size() < 2) scratch.spare.resize(2);
  auto& cand = scratch.spare[0];
  cand.clear(nroles);
  const auto stride = static_cast<std::size_t>(nroles);
  const auto append_from = [&](const View& v, std::size_t i) {
    cand.nodes.push_back(v.nodes[i]);
    cand.hits.resize(cand.hits.size() + stride);
    if (v.hits != nullptr) cand.hits[cand.hits.size() - stride + static_cast<std::size_t>(v.local_role)] = v.hits[i];
  };

  if (cell.op == StageOp::ForAll || cell.op == StageOp::Differentiate) {
    for (std::size_t i = 0; i < views[0].nodes.size(); ++i) append_from(views[0], i);
  } else if (cell.op == StageOp::Intersect) {
    // Drive with the smallest actual operand.
    std::vector<std::size_t> order(views.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return views[x].nodes.size() < views[y].nodes.size(); });
    const auto& first = views[order[0]];
    for (std::size_t i = 0; i < first.nodes.size(); ++i) append_from(first, i);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::size_t k = 1; k < order.size() && !cand.nodes.empty(); ++k) {
      const auto& v = views[order[k]];
      intersect_sorted(cand.nodes, v.nodes, pairs);
      auto& next = scratch.spare[1];
      next.clear(nroles);
      next.nodes.reserve(pairs.size());
      next.hits.reserve(pairs.size() * stride);
      for (const auto& [ci, vi] : pairs) {
        next.nodes.push_back(cand.nodes[ci]);
        next.hits.insert(next.hits.end(), cand.hits.begin() + static_cast<std::ptrdiff_t>(ci * stride),
                         cand.hits.begin() + static_cast<std::ptrdiff_t>((ci + 1) * stride));
        if (v.hits != nullptr) next.hits[next.hits.size() - stride + static_cast<std::size_t>(v.local_role)] = v.hits[vi];
      }
      cand.nodes.swap(next.nodes);
      cand.hits.swap(next.hits);
    }
  } else {
    std::vector<NodeId> all;
    for (const auto& v : views) all.insert(all.end(), v.nodes.begin(), v.nodes.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    cand.nodes = all;
    cand.hits.assign(all.size() * stride, RoleHit{});
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (const auto& v : views) {
      if (v.hits == nullptr) continue;
      intersect_sorted(cand.nodes, v.nodes, pairs);
      for (const auto& [ci, vi] : pairs) cand.hits[ci * stride + static_cast<std::size_t>(v.local_role)] = v.hits[vi];
    }
  }

  const auto reg = [&](int r, NodeId candidate) {
    return r == kCandidate ? candidate : b.registers[static_cast<std::size_t>(r)];
  };
  const auto role_time = [&](int r, std::size_t i) {
    if (r >= cell.first_role && r < cell.first_role + nroles) {
      return cand.hits[i * stride + static_cast<std::size_t>(r - cell.first_role)].t;
    }
    return b.bound[static_cast<std::size_t>(r)].t;
  };
  for (std::size_t i = 0; i < cand.nodes.size(); ++i) {
    const NodeId n = cand.nodes[i];
    bool keep = true;
    for (const auto& p : cell.skip_preds) {
      if ((reg(p.lhs, n) == reg(p.rhs, n)) == p.equal) {
        keep = false;
        break;
      }
    }
    for (std::size_t k = 0; keep && k < cell.order_preds.size(); ++k) {
      const auto& o = cell.order_preds[k];
      keep = holds(o.op, role_time(o.lhs, i), role_time(o.rhs, i));
    }
    if (!keep) continue;
    out.nodes.push_back(n);
    out.hits.insert(out.hits.end(), cand.hits.begin() + static_cast<std::ptrdiff_t>(i * stride),
                    cand.hits.begin() + static_cast<std::ptrdiff_t>((i + 1) * stride));
  }
}

namespace detail {

bool is_self_loop(const TemporalGraph& g, EdgeId e) {
  const auto& r = g.edge(e);
  return r.src == r.dst;
}

GenericRunner::GenericRunner(const ExecutionPlan& plan, const TemporalGraph& g, Scratch& scratch)
    : plan_(plan), g_(g), scratch_(scratch) {
  slot_cell_.assign(static_cast<std::size_t>(plan.slot_count), -1);
  role_ref_.assign(static_cast<std::size_t>(plan.role_count), RoleRef{});
  for (std::size_t i = 0; i < plan.cells.size(); ++i) {
    const auto& c = plan.cells[i];
    slot_cell_[static_cast<std::size_t>(c.dst_slot)] = static_cast<int>(i);
    for (const auto& s : c.src) {
      if (s.kind == OperandRef::Kind::Adjacency) {
        role_ref_[static_cast<std::size_t>(s.role)] = RoleRef{static_cast<int>(i), s.direction};
      }
    }
  }
}

Count GenericRunner::run(EdgeId e, const Sink& sink) {
  if (is_self_loop(g_, e)) return 0;
  sink_ = &sink;
  total_ = 0;
  b_.reset(plan_, g_, e);
  descend(0);
  return total_;
}

void GenericRunner::descend(std::size_t ci) {
  if (ci == plan_.cells.size()) {
    emit();
    return;
  }
  const auto& cell = plan_.cells[ci];
  auto& out = b_.slots[static_cast<std::size_t>(cell.dst_slot)];
  execute_cell(cell, plan_, b_, g_, scratch_, out);
  if (!cell.scalar_output) {
    descend(ci + 1);
    return;
  }
  const auto reg = static_cast<std::size_t>(scalar_register(cell.dst_slot));
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    b_.registers[reg] = out.nodes[i];
    for (int k = 0; k < cell.role_count; ++k) b_.bound[static_cast<std::size_t>(cell.first_role + k)] = out.hit(i, k);
    descend(ci + 1);
  }
  b_.registers[reg] = kNoNode;
}

void GenericRunner::emit() {
  const auto& em = plan_.emission;
  const bool edges = em.multiplicity == Multiplicity::Edges;
  const auto size_of = [&](int slot) -> std::size_t {
    const auto& cell = plan_.cells[static_cast<std::size_t>(slot_cell_[static_cast<std::size_t>(slot)])];
    return cell.scalar_output ? 1 : b_.slots[static_cast<std::size_t>(slot)].size();
  };
  const auto weight_of = [&](int slot) -> Count {
    const auto& cell = plan_.cells[static_cast<std::size_t>(slot_cell_[static_cast<std::size_t>(slot)])];
    if (cell.scalar_output) return 1;
    const auto& set = b_.slots[static_cast<std::size_t>(slot)];
    if (!edges) return static_cast<Count>(set.size());
    Count sum = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      Count w = 1;
      for (int k = 0; k < set.role_count; ++k) {
        if (set.hit(i, k).mult > 0) w *= set.hit(i, k).mult;
      }
      sum += w;
    }
    return sum;
  };
  const auto k = static_cast<std::size_t>(em.min_size);
  for (int s : em.targets) {
    if (size_of(s) < k) return;
  }
  if (plan_.attribution == Attribution::Members || em.mode == EmitMode::InstanceList) {
    emit_members();
    if (plan_.attribution == Attribution::Members) return;
  }
  Count value = 0;
  switch (em.mode) {
    case EmitMode::SetCardinality: value = weight_of(em.targets[0]); break;
    case EmitMode::SourceCount:
    case EmitMode::InstanceList: value = 1; break;
    case EmitMode::PairProduct: value = weight_of(em.targets[0]) * weight_of(em.targets[1]); break;
  }
  if (edges) {
    for (int r : plan_.loop_roles) value *= b_.bound[static_cast<std::size_t>(r)].mult;
  }
  total_ += value;
}

void GenericRunner::qualifying_edges(int role, NodeId node, std::vector<EdgeId>& out) const {
  out.clear();
  const auto r = static_cast<std::size_t>(role);
  const auto& ref = role_ref_[r];
  const auto& cell = plan_.cells[static_cast<std::size_t>(ref.cell)];
  const NodeId base = b_.role_base[r];
  const TimeWindow w = b_.role_window[r];
  if (w.lo > w.hi) return;
  for (const auto& a : window_neighbors(g_, base, ref.direction, w)) {
    if (a.node != node || a.node == base) continue;
    if (!edge_passes(cell, role, a.edge, b_, g_)) continue;
    out.push_back(a.edge);
  }
}

bool GenericRunner::anchored(EdgeId e, int role) const {
  if (role >= 0 && plan_.role_window[static_cast<std::size_t>(role)] == WindowSide::Forward) return true;
  const auto& x = g_.edge(e);
  return x.timestamp < b_.t || (x.timestamp == b_.t && e <= b_.trigger);
}

void GenericRunner::add_role_groups(int slot, std::size_t member, bool all_edges) {
  const auto& cell = plan_.cells[static_cast<std::size_t>(slot_cell_[static_cast<std::size_t>(slot)])];
  if (cell.scalar_output) return;  // its roles are loop roles, already grouped
  const auto& set = b_.slots[static_cast<std::size_t>(slot)];
  extra_nodes_.push_back(set.nodes[member]);
  for (int k = 0; k < set.role_count; ++k) {
    const auto& h = set.hit(member, k);
    if (h.mult == 0) continue;
    if (groups_.size() <= group_count_) groups_.emplace_back();
    auto& grp = groups_[group_count_++];
    grp.role = cell.first_role + k;
    if (all_edges) {
      qualifying_edges(grp.role, set.nodes[member], grp.edges);
    } else {
      grp.edges.assign(1, h.rep);
    }
  }
}

void GenericRunner::enumerate_groups(std::size_t depth) {
  const bool members = plan_.attribution == Attribution::Members;
  if (depth == group_count_) {
    members_tmp_.assign(1, b_.trigger);
    members_tmp_.insert(members_tmp_.end(), choice_.begin(), choice_.begin() + static_cast<std::ptrdiff_t>(depth));
    std::sort(members_tmp_.begin(), members_tmp_.end());
    members_tmp_.erase(std::unique(members_tmp_.begin(), members_tmp_.end()), members_tmp_.end());
    if (members && sink_->members != nullptr) {
      for (EdgeId x : members_tmp_) ++sink_->members->at(x, sink_->column);
    }
    if (plan_.emission.mode == EmitMode::InstanceList && sink_->instances != nullptr) {
      record_instance(members_tmp_);
    }
    return;
  }
  const auto& grp = groups_[depth];
  if (choice_.size() <= depth) choice_.resize(depth + 1);
  for (EdgeId x : grp.edges) {
    if (members && !anchored(x, grp.role)) continue;
    choice_[depth] = x;
    enumerate_groups(depth + 1);
  }
}

void GenericRunner::record_instance(const std::vector<EdgeId>& edges) {
  InstanceRecord rec;
  rec.pattern = plan_.name;
  rec.trigger = b_.trigger;
  rec.edges = edges;
  rec.nodes.push_back(b_.registers[kTriggerSrc]);
  rec.nodes.push_back(b_.registers[kTriggerDst]);
  for (std::size_t r = 2; r < b_.registers.size(); ++r) {
    if (b_.registers[r] != kNoNode) rec.nodes.push_back(b_.registers[r]);
  }
  rec.nodes.insert(rec.nodes.end(), extra_nodes_.begin(), extra_nodes_.end());
  std::sort(rec.nodes.begin(), rec.nodes.end());
  rec.nodes.erase(std::unique(rec.nodes.begin(), rec.nodes.end()), rec.nodes.end());
  sink_->instances->push_back(std::move(rec));
}

void GenericRunner::emit_members() {
  const auto& em = plan_.emission;
  const bool edges = em.multiplicity == Multiplicity::Edges;
  const auto loop_groups = [&]() {
    group_count_ = 0;
    extra_nodes_.clear();
    for (int r : plan_.loop_roles) {
      if (groups_.size() <= group_count_) groups_.emplace_back();
      auto& grp = groups_[group_count_++];
      grp.role = r;
      const auto& h = b_.bound[static_cast<std::size_t>(r)];
      if (edges) {
        // The loop variable is the node this role reached.
        const auto& cell = plan_.cells[static_cast<std::size_t>(role_ref_[static_cast<std::size_t>(r)].cell)];
        qualifying_edges(r, b_.registers[static_cast<std::size_t>(scalar_register(cell.dst_slot))], grp.edges);
      } else {
        grp.edges.assign(1, h.rep);
      }
    }
  };
  const auto set_size = [&](int slot) -> std::size_t {
    const auto& cell = plan_.cells[static_cast<std::size_t>(slot_cell_[static_cast<std::size_t>(slot)])];
    return cell.scalar_output ? 1 : b_.slots[static_cast<std::size_t>(slot)].size();
  };

  switch (em.mode) {
    case EmitMode::SetCardinality: {
      const int slot = em.targets[0];
      for (std::size_t i = 0; i < set_size(slot); ++i) {
        loop_groups();
        add_role_groups(slot, i, edges);
        enumerate_groups(0);
      }
      break;
    }
    case EmitMode::SourceCount:
    case EmitMode::InstanceList: {
      loop_groups();
      const int slot = em.targets[0];
      for (std::size_t i = 0; i < set_size(slot); ++i) add_role_groups(slot, i, false);
      enumerate_groups(0);
      break;
    }
    case EmitMode::PairProduct: {
      const int s1 = em.targets[0], s2 = em.targets[1];
      for (std::size_t i = 0; i < set_size(s1); ++i) {
        for (std::size_t j = 0; j < set_size(s2); ++j) {
          loop_groups();
          add_role_groups(s1, i, edges);
          add_role_groups(s2, j, edges);
          enumerate_groups(0);
        }
      }
      break;
    }
  }
}

}  // namespace detail

}  // namespace tempmine
