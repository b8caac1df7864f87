#pragma once

#include <vector>

#include "mcjesp/fsc_builder.hpp"
#include "mcjesp/model.hpp"

namespace mcjesp {

/// The Dec-POMDP seen as one centralized agent choosing joint actions and
/// receiving joint observations.
class CentralizedModel {
 public:
  using State = StateId;

  explicit CentralizedModel(const DecPomdpSimulator& sim) : sim_(&sim) {}

  int num_actions() const { return sim_->action_space().total(); }
  double discount() const { return sim_->discount(); }
  PomdpStep<StateId> step(StateId s, ActionId joint, Rng& rng) const {
    const auto tr = sim_->step(s, joint, rng);
    return {tr.next, tr.obs, tr.reward};
  }

 private:
  const DecPomdpSimulator* sim_;
};

/// Posterior over states after joint action `a` when only agent i's
/// observation is known; the other agents' observations are summed out.
/// Throws ImpossibleObservation when Pr(o_i | a, b) = 0.
std::vector<double> one_sided_update_exact(const ExplicitDecPomdp& model, const std::vector<double>& belief,
                                           JointIndex a, ObsId o_i, int agent);

/// Steps every sampled state with the fixed joint action and buckets the
/// successors by agent i's observation alone.
ProcessResult<StateId> heuristic_process_action(const ParticleBelief<StateId>& b, const DecPomdpSimulator& sim,
                                                JointIndex a, int agent, const BuildParams& params, Rng& rng);

/// Initial controller for `agent` from the centralized relaxation: POMCP
/// picks joint actions on the raw simulator, the node keeps agent i's part.
Fsc build_heuristic_fsc(const DecPomdpSimulator& sim, int agent, const BuildParams& params,
                        const PomcpParams& pomcp, Rng& rng, BuildTrace* trace = nullptr);

/// Single node, uniformly random action.
Fsc trivial_fsc(const DecPomdpSimulator& sim, int agent, Rng& rng);

}  // namespace mcjesp
