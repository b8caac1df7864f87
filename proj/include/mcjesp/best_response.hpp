#pragma once

#include <array>
#include <compare>
#include <map>
#include <utility>
#include <vector>

#include "mcjesp/belief.hpp"
#include "mcjesp/fsc.hpp"
#include "mcjesp/model.hpp"
#include "mcjesp/pomcp.hpp"

namespace mcjesp {

/// Marks "no observation yet" in an extended state (t = 0).  Never part of
/// an agent's observation alphabet.
inline constexpr ObsId kNoObservation = -1;

/// Best-response POMDP state: environment state, the other agents' current
/// controller nodes and agent i's latest observation.  `nodes` is indexed by
/// agent id; the best-responding agent's slot stays 0.
struct ExtendedState {
  StateId state = 0;
  ObsId last_obs = kNoObservation;
  std::array<NodeId, kMaxAgents> nodes{};

  friend auto operator<=>(const ExtendedState&, const ExtendedState&) = default;
};

/// Generative best-response model for one agent: the Dec-POMDP simulator
/// with every other agent driven by its fixed controller.  Holds a reference
/// to the simulator and copies of the other controllers.
class BestResponseModel {
 public:
  using State = ExtendedState;

  /// `policy.fscs[agent]` is ignored; every other slot must match the
  /// simulator's alphabets.
  BestResponseModel(const DecPomdpSimulator& sim, const JointPolicy& policy, int agent);

  int agent() const { return agent_; }
  int num_actions() const { return sim_->action_space().size(agent_); }
  int num_observations() const { return sim_->observation_space().size(agent_); }
  double discount() const { return sim_->discount(); }
  const DecPomdpSimulator& simulator() const { return *sim_; }
  const Fsc& controller(int j) const { return fscs_.at(j); }

  ExtendedState initial(StateId s) const;

  /// Joint action formed by `own` and the other controllers' outputs in e.
  JointIndex joint_action(const ExtendedState& e, ActionId own) const;

  /// One call to the simulator; the returned state's `last_obs` equals the
  /// returned observation.
  PomdpStep<ExtendedState> step(const ExtendedState& e, ActionId own, Rng& rng) const;

 private:
  const DecPomdpSimulator* sim_;
  std::vector<Fsc> fscs_;
  int agent_;
};

inline PomdpStep<ExtendedState> gbr_step(const BestResponseModel& m, const ExtendedState& e, ActionId own,
                                         Rng& rng) {
  return m.step(e, own, rng);
}

/// n_p particles <s ~ b0, start nodes, no observation>.
ParticleBelief<ExtendedState> initial_extended_belief(const BestResponseModel& m, int num_particles, Rng& rng);

/// Explicit best-response POMDP over the extended states reachable from
/// (b0, start nodes, no observation).  The observation model is the
/// indicator O_e(a, e', o) = [o == e'.last_obs], so it is not stored.
struct ExtendedPomdp {
  int agent = 0;
  int num_actions = 0;
  int num_observations = 0;
  double discount = 0.0;
  std::vector<ExtendedState> states;
  /// Row for (e, a) at index e * num_actions + a: (e', T_e) pairs, e' sorted.
  std::vector<std::vector<std::pair<int, double>>> transitions;
  std::vector<double> rewards;  // r_e at e * num_actions + a
  std::vector<std::pair<int, double>> initial;
  std::map<ExtendedState, int> index;

  const std::vector<std::pair<int, double>>& row(int e, ActionId a) const {
    return transitions[static_cast<std::size_t>(e) * num_actions + a];
  }
  double reward(int e, ActionId a) const { return rewards[static_cast<std::size_t>(e) * num_actions + a]; }
  double observation_prob(ActionId, int next, ObsId o) const { return states[next].last_obs == o ? 1.0 : 0.0; }
  /// -1 when `e` is not reachable.
  int find(const ExtendedState& e) const {
    auto it = index.find(e);
    return it == index.end() ? -1 : it->second;
  }
};

ExtendedPomdp exact_extended(const ExplicitDecPomdp& model, const JointPolicy& policy, int agent);

/// Exact value of agent i's controller on the explicit best-response POMDP.
double evaluate_best_response_exact(const ExtendedPomdp& pomdp, const Fsc& fsc, double tol = 1e-6);

}  // namespace mcjesp
