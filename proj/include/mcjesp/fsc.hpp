#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mcjesp/model.hpp"
#include "mcjesp/types.hpp"

namespace mcjesp {

/// Deterministic finite-state controller for one agent.  Node 0 is the start
/// node; `action(n)` is the emitted action and `next(n, o)` the successor.
/// A freshly added node self-loops on every observation, so the transition
/// table is total at all times.
class Fsc {
 public:
  Fsc() = default;
  Fsc(int agent, int num_actions, int num_observations);

  /// Single-node controller emitting `action` forever.
  static Fsc constant(int agent, int num_actions, int num_observations, ActionId action);

  NodeId add_node(ActionId action);
  void set_next(NodeId n, ObsId o, NodeId target);
  void set_action(NodeId n, ActionId a);

  ActionId action(NodeId n) const { return actions_[static_cast<std::size_t>(n)]; }
  NodeId next(NodeId n, ObsId o) const {
    return next_[static_cast<std::size_t>(n) * num_observations_ + o];
  }

  int size() const { return static_cast<int>(actions_.size()); }
  int agent() const { return agent_; }
  int num_actions() const { return num_actions_; }
  int num_observations() const { return num_observations_; }

  /// Throws DimensionError if a table entry is out of range.
  void validate() const;

  friend bool operator==(const Fsc&, const Fsc&) = default;

 private:
  int agent_ = 0;
  int num_actions_ = 0;
  int num_observations_ = 0;
  std::vector<ActionId> actions_;
  std::vector<NodeId> next_;
};

inline NodeId fsc_step(const Fsc& fsc, NodeId n, ObsId o) { return fsc.next(n, o); }

/// One controller per agent, indexed by agent id.
struct JointPolicy {
  std::vector<Fsc> fscs;

  int num_agents() const { return static_cast<int>(fscs.size()); }
  std::vector<int> sizes() const;
  friend bool operator==(const JointPolicy&, const JointPolicy&) = default;
};

/// Throws DimensionError unless every controller matches the simulator's
/// per-agent alphabets and agent ids.
void check_compatible(const JointPolicy& policy, const DecPomdpSimulator& sim);

/// Graphviz digraph: nodes labeled by action, edges by observation.  Names
/// come from `model` when given, otherwise indices are printed.
std::string fsc_to_dot(const Fsc& fsc, const ExplicitDecPomdp* model = nullptr);

nlohmann::json fsc_to_json(const Fsc& fsc, const ExplicitDecPomdp* model = nullptr);
Fsc fsc_from_json(const nlohmann::json& j);

nlohmann::json policy_to_json(const JointPolicy& policy, const ExplicitDecPomdp* model = nullptr);
JointPolicy policy_from_json(const nlohmann::json& j);

}  // namespace mcjesp
