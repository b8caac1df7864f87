#include "mcjesp/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "mcjesp/markov_chain.hpp"
#include "mcjesp/parallel.hpp"

namespace mcjesp {

int rollout_horizon(double discount, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw Error(fmt::format("evaluation cutoff {} outside (0,1)", cutoff));
  if (discount <= 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(cutoff) / std::log(discount))));
}

nlohmann::json to_json(const McEvaluation& e) {
  return {{"mean", e.mean}, {"stderr", e.std_error}, {"num_sims", e.num_sims}, {"t_cut", e.t_cut}};
}

double MarkovRewardChain::evaluate(double discount, double tol) const {
  const int n = num_states();
  std::vector<double> v(reward);
  std::vector<double> w(static_cast<std::size_t>(n));
  if (discount > 0.0) {
    const double stop = tol * (1.0 - discount) / discount;
    for (;;) {
      double delta = 0.0;
      for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        for (std::size_t k = offsets[s]; k < offsets[s + 1]; ++k) acc += probs[k] * v[targets[k]];
        w[s] = reward[s] + discount * acc;
        delta = std::max(delta, std::abs(w[s] - v[s]));
      }
      v.swap(w);
      if (delta < stop) break;
    }
  }
  double value = 0.0;
  for (const auto& [s, p] : initial) value += p * v[s];
  return value;
}

McEvaluation evaluate_mc(const JointPolicy& policy, const DecPomdpSimulator& sim, long num_sims, double cutoff,
                         Rng& rng, int workers) {
  if (num_sims < 1) throw Error("evaluate_mc needs at least one simulation");
  check_compatible(policy, sim);
  const int t_cut = rollout_horizon(sim.discount(), cutoff);
  const Rng base = rng.split(rng.next());
  const int n = sim.num_agents();
  const auto& A = sim.action_space();
  const auto& O = sim.observation_space();
  const double gamma = sim.discount();

  constexpr long kBlock = 1024;
  const long blocks = (num_sims + kBlock - 1) / kBlock;
  std::vector<double> sums(static_cast<std::size_t>(blocks));
  std::vector<double> squares(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), workers, [&](std::size_t b) {
    std::array<NodeId, kMaxAgents> nodes{};
    std::array<int, kMaxAgents> acts{};
    double sum = 0.0;
    double sq = 0.0;
    const long lo = static_cast<long>(b) * kBlock;
    const long hi = std::min(num_sims, lo + kBlock);
    for (long k = lo; k < hi; ++k) {
      Rng r = base.split(static_cast<std::uint64_t>(k));
      StateId s = sim.sample_initial(r);
      nodes.fill(0);
      double ret = 0.0;
      double disc = 1.0;
      for (int t = 0; t < t_cut; ++t) {
        for (int i = 0; i < n; ++i) acts[i] = policy.fscs[i].action(nodes[i]);
        const auto tr = sim.step(s, A.encode(std::span<const int>(acts.data(), n)), r);
        ret += disc * tr.reward;
        disc *= gamma;
        for (int i = 0; i < n; ++i) nodes[i] = policy.fscs[i].next(nodes[i], O.component(tr.obs, i));
        s = tr.next;
      }
      sum += ret;
      sq += ret * ret;
    }
    sums[b] = sum;
    squares[b] = sq;
  });
  double sum = 0.0;
  double sq = 0.0;
  for (long b = 0; b < blocks; ++b) {
    sum += sums[b];
    sq += squares[b];
  }
  const double nd = static_cast<double>(num_sims);
  const double mean = sum / nd;
  const double var = num_sims > 1 ? std::max(0.0, (sq - nd * mean * mean) / (nd - 1.0)) : 0.0;
  return {mean, std::sqrt(var / nd), num_sims, t_cut};
}

double evaluate_exact(const JointPolicy& policy, const ExplicitDecPomdp& model, double tol) {
  if (!(tol > 0.0)) throw Error("evaluate_exact needs tol > 0");
  check_compatible(policy, model);
  const int n = model.num_agents();
  const auto& A = model.action_space();
  const auto& O = model.observation_space();

  // Packed key: state in the most significant position, then one digit per
  // agent's node.
  std::array<std::uint64_t, kMaxAgents> radix{};
  std::uint64_t span = 1;
  for (int i = n - 1; i >= 0; --i) {
    radix[i] = span;
    span *= static_cast<std::uint64_t>(policy.fscs[i].size());
  }
  const auto pack = [&](StateId s, const std::array<NodeId, kMaxAgents>& nodes) {
    std::uint64_t key = static_cast<std::uint64_t>(s) * span;
    for (int i = 0; i < n; ++i) key += static_cast<std::uint64_t>(nodes[i]) * radix[i];
    return key;
  };

  std::unordered_map<std::uint64_t, int> index;
  std::vector<std::uint64_t> keys;
  const auto intern = [&](std::uint64_t key) {
    auto [it, fresh] = index.try_emplace(key, static_cast<int>(keys.size()));
    if (fresh) keys.push_back(key);
    return it->second;
  };

  MarkovRewardChain chain;
  const std::array<NodeId, kMaxAgents> start{};
  const auto& b0 = model.initial_belief();
  for (StateId s = 0; s < model.num_states(); ++s)
    if (b0[s] > 0.0) chain.initial.emplace_back(intern(pack(s, start)), b0[s]);

  std::array<NodeId, kMaxAgents> nodes{};
  std::array<NodeId, kMaxAgents> next{};
  std::array<int, kMaxAgents> acts{};
  for (std::size_t idx = 0; idx < keys.size(); ++idx) {
    std::uint64_t key = keys[idx];
    const auto s = static_cast<StateId>(key / span);
    key %= span;
    for (int i = 0; i < n; ++i) {
      nodes[i] = static_cast<NodeId>(key / radix[i]);
      key %= radix[i];
      acts[i] = policy.fscs[i].action(nodes[i]);
    }
    const JointIndex a = A.encode(std::span<const int>(acts.data(), n));
    chain.reward.push_back(model.reward(s, a));
    for (const auto& o : model.exact_probs(s, a)) {
      for (int i = 0; i < n; ++i) next[i] = policy.fscs[i].next(nodes[i], O.component(o.obs, i));
      chain.targets.push_back(intern(pack(o.next, next)));
      chain.probs.push_back(o.prob);
    }
    chain.offsets.push_back(chain.targets.size());
  }
  return chain.evaluate(model.discount(), tol);
}

}  // namespace mcjesp
