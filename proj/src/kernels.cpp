#include <algorithm>

#include "engine_internal.hpp"

namespace tempmine {

KernelScratch::KernelScratch(NodeId node_count) {
  for (int k = 0; k < kTables; ++k) {
    stamp_[k].assign(node_count, 0);
    time_[k].assign(node_count, 0);
    count_[k].assign(node_count, 0);
  }
}

std::uint32_t KernelScratch::next(int k) {
  if (++gen_[k] == 0) {
    std::fill(stamp_[k].begin(), stamp_[k].end(), 0);
    gen_[k] = 1;
  }
  return gen_[k];
}

namespace {

TimeWindow backward(Timestamp t, Timestamp delta) { return {t - delta, t}; }

// Marks every non-loop neighbor of `u` in table k with its latest time and
// edge count. Appends first sightings to `list` when given.
void gather(const TemporalGraph& g, NodeId u, Direction d, TimeWindow w, NodeId exclude, KernelScratch& s,
            int k, std::vector<NodeId>* list) {
  for (const auto& a : window_neighbors(g, u, d, w)) {
    if (a.node == u || a.node == exclude) continue;
    if (!s.marked(k, a.node)) {
      s.mark(k, a.node);
      s.time(k, a.node) = a.t;
      s.count(k, a.node) = 1;
      if (list != nullptr) list->push_back(a.node);
    } else {
      s.time(k, a.node) = std::max(s.time(k, a.node), a.t);
      ++s.count(k, a.node);
    }
  }
}

}  // namespace

Count count_fan(const TemporalGraph& g, EdgeId e, Direction d, Timestamp delta) {
  const auto& rec = g.edge(e);
  if (rec.src == rec.dst) return 0;
  const NodeId u = d == Direction::In ? rec.dst : rec.src;
  Count n = 0;
  for (const auto& a : window_neighbors(g, u, d, backward(rec.timestamp, delta))) {
    if (a.node != u && a.edge != e) ++n;
  }
  return n;
}

std::array<Count, 4> count_degree(const TemporalGraph& g, EdgeId e, Timestamp delta) {
  const auto& rec = g.edge(e);
  std::array<Count, 4> out{};
  if (rec.src == rec.dst) return out;
  const auto w = backward(rec.timestamp, delta);
  const auto deg = [&](NodeId u, Direction d) {
    Count n = 0;
    for (const auto& a : window_neighbors(g, u, d, w)) n += a.node != u;
    return n;
  };
  out[0] = deg(rec.src, Direction::In);
  out[1] = deg(rec.src, Direction::Out);
  out[2] = deg(rec.dst, Direction::In);
  out[3] = deg(rec.dst, Direction::Out);
  return out;
}

Count count_cycles(const TemporalGraph& g, EdgeId e, Timestamp delta, int length, bool ordered,
                   bool edge_tuples, KernelScratch& s) {
  const auto& rec = g.edge(e);
  const NodeId n0 = rec.src, n1 = rec.dst;
  if (n0 == n1) return 0;
  const auto w = backward(rec.timestamp, delta);

  if (length == 2) {
    Count n = 0;
    for (const auto& a : window_neighbors(g, n1, Direction::Out, w)) n += a.node == n0;
    return edge_tuples ? n : (n > 0 ? 1 : 0);
  }

  // Mark table 0: closing leg x -> N0.
  s.next(0);
  gather(g, n0, Direction::In, w, length == 4 ? n1 : kNoNode, s, 0, nullptr);

  if (length == 3) {
    // Mark table 1: N1 -> x restricted to closing-leg nodes.
    s.next(1);
    s.list_a.clear();
    for (const auto& a : window_neighbors(g, n1, Direction::Out, w)) {
      if (a.node == n1 || !s.marked(0, a.node)) continue;
      if (!s.marked(1, a.node)) {
        s.mark(1, a.node);
        s.time(1, a.node) = a.t;
        s.count(1, a.node) = 1;
        s.list_a.push_back(a.node);
      } else {
        s.time(1, a.node) = std::max(s.time(1, a.node), a.t);
        ++s.count(1, a.node);
      }
    }
    Count n = 0;
    for (NodeId x : s.list_a) {
      if (ordered && s.time(1, x) > s.time(0, x)) continue;
      n += edge_tuples ? static_cast<Count>(s.count(1, x)) * s.count(0, x) : 1;
    }
    return n;
  }

  // length 4: N0 -> N1 -> a -> b -> N0.
  s.next(1);
  s.list_a.clear();
  gather(g, n1, Direction::Out, w, n0, s, 1, &s.list_a);
  Count total = 0;
  for (NodeId a : s.list_a) {
    const Timestamp t1 = s.time(1, a);
    s.next(2);
    s.list_b.clear();
    for (const auto& x : window_neighbors(g, a, Direction::Out, w)) {
      if (x.node == a || !s.marked(0, x.node)) continue;
      if (!s.marked(2, x.node)) {
        s.mark(2, x.node);
        s.time(2, x.node) = x.t;
        s.count(2, x.node) = 1;
        s.list_b.push_back(x.node);
      } else {
        s.time(2, x.node) = std::max(s.time(2, x.node), x.t);
        ++s.count(2, x.node);
      }
    }
    Count inner = 0;
    for (NodeId b : s.list_b) {
      if (ordered && (t1 > s.time(2, b) || s.time(2, b) > s.time(0, b))) continue;
      inner += edge_tuples ? static_cast<Count>(s.count(2, b)) * s.count(0, b) : 1;
    }
    total += edge_tuples ? inner * s.count(1, a) : inner;
  }
  return total;
}

Count count_scatter_gather(const TemporalGraph& g, EdgeId e, Timestamp delta, std::int64_t min_size,
                           bool ordered, KernelScratch& s) {
  const auto& rec = g.edge(e);
  const NodeId mid = rec.src, dst = rec.dst;
  if (mid == dst) return 0;
  const auto w = backward(rec.timestamp, delta);

  // Mark table 0: gather legs m -> dst.
  s.next(0);
  gather(g, dst, Direction::In, w, kNoNode, s, 0, nullptr);
  // Mark table 1: distinct sources paying the trigger's mid.
  s.next(1);
  s.list_a.clear();
  gather(g, mid, Direction::In, w, dst, s, 1, &s.list_a);

  Count sources = 0;
  for (NodeId src : s.list_a) {
    s.next(2);
    s.list_b.clear();
    std::int64_t reached = 0;
    for (const auto& a : window_neighbors(g, src, Direction::Out, w)) {
      if (a.node == src || !s.marked(0, a.node)) continue;
      if (!s.marked(2, a.node)) {
        s.mark(2, a.node);
        s.time(2, a.node) = a.t;
        if (!ordered && ++reached >= min_size) break;
        s.list_b.push_back(a.node);
      } else {
        s.time(2, a.node) = std::max(s.time(2, a.node), a.t);
      }
    }
    if (ordered) {
      reached = 0;
      for (NodeId m : s.list_b) reached += s.time(2, m) <= s.time(0, m);
    }
    sources += reached >= min_size;
  }
  return sources;
}

Count count_stack(const TemporalGraph& g, EdgeId e, Timestamp delta, bool ordered, std::int64_t min_size,
                  KernelScratch& s) {
  const auto& rec = g.edge(e);
  const NodeId u = rec.src, v = rec.dst;
  if (u == v) return 0;
  const Timestamp t = rec.timestamp;
  s.next(0);
  s.list_a.clear();
  gather(g, u, Direction::In, backward(t, delta), v, s, 0, &s.list_a);
  s.next(1);
  s.list_b.clear();
  const TimeWindow out_w = ordered ? TimeWindow{t, t + delta} : backward(t, delta);
  gather(g, v, Direction::Out, out_w, u, s, 1, &s.list_b);
  const auto a = static_cast<Count>(s.list_a.size());
  const auto c = static_cast<Count>(s.list_b.size());
  return a >= min_size && c >= min_size ? a * c : 0;
}

Count run_kernel(const ExecutionPlan& plan, const TemporalGraph& g, EdgeId e, KernelScratch& s) {
  const auto& k = plan.kernel.params;
  switch (plan.kernel.hint) {
    case KernelHint::Fan: return count_fan(g, e, k.direction, plan.delta);
    case KernelHint::Degree: {
      const auto& rec = g.edge(e);
      if (rec.src == rec.dst) return 0;
      const NodeId u = k.endpoint == Endpoint::Src ? rec.src : rec.dst;
      Count n = 0;
      for (const auto& a : window_neighbors(g, u, k.direction, backward(rec.timestamp, plan.delta))) {
        n += a.node != u;
      }
      return n;
    }
    case KernelHint::Cycle:
      return count_cycles(g, e, plan.delta, k.cycle_length, k.ordered, k.edge_tuples, s);
    case KernelHint::ScatterGather: return count_scatter_gather(g, e, plan.delta, k.min_size, k.ordered, s);
    case KernelHint::Stack: return count_stack(g, e, plan.delta, k.ordered, k.min_size, s);
    case KernelHint::Generic: break;
  }
  throw InvariantError("run_kernel called on generic plan " + plan.name);
}

}  // namespace tempmine
