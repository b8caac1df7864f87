#include "mcjesp/best_response.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "mcjesp/markov_chain.hpp"

namespace mcjesp {

BestResponseModel::BestResponseModel(const DecPomdpSimulator& sim, const JointPolicy& policy, int agent)
    : sim_(&sim), fscs_(policy.fscs), agent_(agent) {
  const int n = sim.num_agents();
  if (agent < 0 || agent >= n) throw DimensionError(fmt::format("agent {} out of range", agent));
  if (policy.num_agents() != n) throw DimensionError("best-response model needs one controller slot per agent");
  for (int j = 0; j < n; ++j) {
    if (j == agent) continue;
    const auto& f = fscs_[j];
    f.validate();
    if (f.num_actions() != sim.action_space().size(j) || f.num_observations() != sim.observation_space().size(j))
      throw DimensionError(fmt::format("controller of agent {} does not match its alphabets", j));
  }
}

ExtendedState BestResponseModel::initial(StateId s) const {
  ExtendedState e;
  e.state = s;
  return e;
}

JointIndex BestResponseModel::joint_action(const ExtendedState& e, ActionId own) const {
  const int n = sim_->num_agents();
  std::array<int, kMaxAgents> acts{};
  for (int j = 0; j < n; ++j) acts[j] = j == agent_ ? own : fscs_[j].action(e.nodes[j]);
  return sim_->action_space().encode(std::span<const int>(acts.data(), n));
}

PomdpStep<ExtendedState> BestResponseModel::step(const ExtendedState& e, ActionId own, Rng& rng) const {
  const auto tr = sim_->step(e.state, joint_action(e, own), rng);
  const auto& O = sim_->observation_space();
  PomdpStep<ExtendedState> out{e, O.component(tr.obs, agent_), tr.reward};
  out.next.state = tr.next;
  out.next.last_obs = out.obs;
  for (int j = 0; j < sim_->num_agents(); ++j)
    if (j != agent_) out.next.nodes[j] = fscs_[j].next(e.nodes[j], O.component(tr.obs, j));
  return out;
}

ParticleBelief<ExtendedState> initial_extended_belief(const BestResponseModel& m, int num_particles, Rng& rng) {
  if (num_particles < 1) throw Error("initial belief needs at least one particle");
  ParticleBelief<ExtendedState> b;
  b.reserve(static_cast<std::size_t>(num_particles));
  for (int k = 0; k < num_particles; ++k) b.add(m.initial(m.simulator().sample_initial(rng)));
  return b;
}

ExtendedPomdp exact_extended(const ExplicitDecPomdp& model, const JointPolicy& policy, int agent) {
  const BestResponseModel br(model, policy, agent);
  const int n = model.num_agents();
  const auto& O = model.observation_space();

  ExtendedPomdp p;
  p.agent = agent;
  p.num_actions = br.num_actions();
  p.num_observations = br.num_observations();
  p.discount = model.discount();
  const auto intern = [&](const ExtendedState& e) {
    auto [it, fresh] = p.index.try_emplace(e, static_cast<int>(p.states.size()));
    if (fresh) p.states.push_back(e);
    return it->second;
  };
  const auto& b0 = model.initial_belief();
  for (StateId s = 0; s < model.num_states(); ++s)
    if (b0[s] > 0.0) p.initial.emplace_back(intern(br.initial(s)), b0[s]);

  for (std::size_t idx = 0; idx < p.states.size(); ++idx) {
    const ExtendedState e = p.states[idx];
    for (ActionId a = 0; a < p.num_actions; ++a) {
      const JointIndex ja = br.joint_action(e, a);
      p.rewards.push_back(model.reward(e.state, ja));
      // Sum over the other agents' observations that lead to the same
      // (s', n', o_i).
      std::map<int, double> row;
      for (const auto& o : model.exact_probs(e.state, ja)) {
        ExtendedState next = e;
        next.state = o.next;
        next.last_obs = O.component(o.obs, agent);
        for (int j = 0; j < n; ++j)
          if (j != agent) next.nodes[j] = br.controller(j).next(e.nodes[j], O.component(o.obs, j));
        row[intern(next)] += o.prob;
      }
      p.transitions.emplace_back(row.begin(), row.end());
    }
  }
  return p;
}

double evaluate_best_response_exact(const ExtendedPomdp& pomdp, const Fsc& fsc, double tol) {
  fsc.validate();
  if (fsc.num_actions() != pomdp.num_actions || fsc.num_observations() != pomdp.num_observations)
    throw DimensionError("controller does not match the best-response POMDP alphabets");
  const auto nodes = static_cast<std::uint64_t>(fsc.size());
  std::unordered_map<std::uint64_t, int> index;
  std::vector<std::uint64_t> keys;
  const auto intern = [&](int e, NodeId n) {
    const std::uint64_t key = static_cast<std::uint64_t>(e) * nodes + static_cast<std::uint64_t>(n);
    auto [it, fresh] = index.try_emplace(key, static_cast<int>(keys.size()));
    if (fresh) keys.push_back(key);
    return it->second;
  };
  MarkovRewardChain chain;
  for (const auto& [e, p] : pomdp.initial) chain.initial.emplace_back(intern(e, 0), p);
  for (std::size_t idx = 0; idx < keys.size(); ++idx) {
    const auto e = static_cast<int>(keys[idx] / nodes);
    const auto n = static_cast<NodeId>(keys[idx] % nodes);
    const ActionId a = fsc.action(n);
    chain.reward.push_back(pomdp.reward(e, a));
    for (const auto& [e2, p] : pomdp.row(e, a)) {
      chain.targets.push_back(intern(e2, fsc.next(n, pomdp.states[e2].last_obs)));
      chain.probs.push_back(p);
    }
    chain.offsets.push_back(chain.targets.size());
  }
  return chain.evaluate(pomdp.discount, tol);
}

}  // namespace mcjesp
