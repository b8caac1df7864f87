#include "mcjesp/heuristic_init.hpp"

#include <fmt/format.h>

namespace mcjesp {

std::vector<double> one_sided_update_exact(const ExplicitDecPomdp& model, const std::vector<double>& belief,
                                           JointIndex a, ObsId o_i, int agent) {
  const int ns = model.num_states();
  const auto& O = model.observation_space();
  if (static_cast<int>(belief.size()) != ns) throw DimensionError("belief size does not match the state count");
  if (agent < 0 || agent >= model.num_agents()) throw DimensionError("agent out of range");
  if (a < 0 || a >= model.action_space().total()) throw DimensionError("joint action out of range");
  if (o_i < 0 || o_i >= O.size(agent)) throw DimensionError("observation out of range");

  std::vector<double> predicted(static_cast<std::size_t>(ns), 0.0);
  for (StateId s = 0; s < ns; ++s) {
    if (belief[s] == 0.0) continue;
    for (StateId s2 = 0; s2 < ns; ++s2) predicted[s2] += model.transition(s, a, s2) * belief[s];
  }
  std::vector<double> post(static_cast<std::size_t>(ns), 0.0);
  double norm = 0.0;
  for (StateId s2 = 0; s2 < ns; ++s2) {
    if (predicted[s2] == 0.0) continue;
    double lik = 0.0;
    for (JointIndex o = 0; o < O.total(); ++o)
      if (O.component(o, agent) == o_i) lik += model.observation(a, s2, o);
    post[s2] = lik * predicted[s2];
    norm += post[s2];
  }
  if (!(norm > 0.0))
    throw ImpossibleObservation(fmt::format("observation {} of agent {} has probability 0 under action {}", o_i,
                                            agent, a));
  for (auto& p : post) p /= norm;
  return post;
}

ProcessResult<StateId> heuristic_process_action(const ParticleBelief<StateId>& b, const DecPomdpSimulator& sim,
                                                JointIndex a, int agent, const BuildParams& params, Rng& rng) {
  const auto& O = sim.observation_space();
  return process_action(
      b,
      [&](StateId s, Rng& r) {
        const auto tr = sim.step(s, a, r);
        return std::pair<StateId, ObsId>(tr.next, O.component(tr.obs, agent));
      },
      O.size(agent), params, rng);
}

Fsc build_heuristic_fsc(const DecPomdpSimulator& sim, int agent, const BuildParams& params,
                        const PomcpParams& pomcp, Rng& rng, BuildTrace* trace) {
  if (agent < 0 || agent >= sim.num_agents()) throw DimensionError("agent out of range");
  if (pomcp.num_particles < 1) throw Error("initial belief needs at least one particle");
  const CentralizedModel central(sim);
  const auto& A = sim.action_space();
  const auto& O = sim.observation_space();
  ParticleBelief<StateId> b0;
  b0.reserve(static_cast<std::size_t>(pomcp.num_particles));
  for (int k = 0; k < pomcp.num_particles; ++k) b0.add(sim.sample_initial(rng));

  const auto plan = [&](const ParticleBelief<StateId>& b, Rng& r) {
    const auto res = pomcp_plan(b, central, pomcp, r);
    return NodeDecision{A.component(res.action, agent), res.action, res.simulations};
  };
  const auto step = [&](StateId s, const NodeDecision& d, Rng& r) {
    const auto tr = sim.step(s, *d.joint_action, r);
    return std::pair<StateId, ObsId>(tr.next, O.component(tr.obs, agent));
  };
  return detail::build_controller(agent, A.size(agent), O.size(agent), b0, plan, step, params, rng, trace);
}

Fsc trivial_fsc(const DecPomdpSimulator& sim, int agent, Rng& rng) {
  if (agent < 0 || agent >= sim.num_agents()) throw DimensionError("agent out of range");
  const int na = sim.action_space().size(agent);
  return Fsc::constant(agent, na, sim.observation_space().size(agent),
                       static_cast<ActionId>(rng.below(static_cast<std::uint64_t>(na))));
}

}  // namespace mcjesp
