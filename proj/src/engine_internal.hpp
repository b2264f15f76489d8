#pragma once

#include <vector>

#include "tempmine/engine.hpp"

namespace tempmine::detail {

// Where one trigger's results go. In members attribution `members` points at
// a (possibly partial) matrix and `column` selects the plan's column.
struct Sink {
  FeatureMatrix* members = nullptr;
  std::size_t column = 0;
  std::vector<InstanceRecord>* instances = nullptr;
};

// Runs a plan's cells as nested loops for one trigger edge at a time.
class GenericRunner {
 public:
  GenericRunner(const ExecutionPlan& plan, const TemporalGraph& g, Scratch& scratch);

  // Returns the trigger-attribution count for e. With members attribution
  // the instance increments go to sink.members instead and 0 is returned.
  Count run(EdgeId e, const Sink& sink);

 private:
  struct RoleRef {
    int cell = -1;
    Direction direction = Direction::Out;
  };

  void descend(std::size_t cell_index);
  void emit();
  void emit_members();
  void record_instance(const std::vector<EdgeId>& edges);
  void add_role_groups(int slot, std::size_t member, bool all_edges);
  void qualifying_edges(int role, NodeId node, std::vector<EdgeId>& out) const;
  void enumerate_groups(std::size_t depth);
  bool anchored(EdgeId e, int role) const;

  const ExecutionPlan& plan_;
  const TemporalGraph& g_;
  Scratch& scratch_;
  Bindings b_;
  std::vector<int> slot_cell_;
  std::vector<RoleRef> role_ref_;
  const Sink* sink_ = nullptr;
  Count total_ = 0;

  // Instance enumeration state (members attribution, instance lists).
  struct Group {
    int role;
    std::vector<EdgeId> edges;
  };
  std::vector<Group> groups_;
  std::size_t group_count_ = 0;
  std::vector<EdgeId> choice_;
  std::vector<EdgeId> members_tmp_;
  std::vector<NodeId> extra_nodes_;
};

bool is_self_loop(const TemporalGraph& g, EdgeId e);

}  // namespace tempmine::detail
