#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "mcjesp/belief.hpp"
#include "mcjesp/best_response.hpp"
#include "mcjesp/fsc.hpp"
#include "mcjesp/pomcp.hpp"

namespace mcjesp {

struct BuildParams {
  int max_nodes = 30;
  int min_particles = 1000;
  double epsilon = 0.1;
  /// Wall-clock limit for one process_action call; 0 disables it.
  double process_timeout_ms = 2000.0;
  long process_max_samples = 100000;

  void validate() const;
};

/// What a node plans: agent i's action and, for the centralized heuristic,
/// the joint action it belongs to.
struct NodeDecision {
  ActionId action = 0;
  std::optional<JointIndex> joint_action;
  long simulations = 0;
};

template <class State>
struct ProcessResult {
  std::vector<ParticleBelief<State>> buckets;  // one per observation of agent i
  long samples = 0;
  bool starved = false;  // stopped with an observed bucket below min_particles

  bool observed(ObsId o) const { return !buckets[static_cast<std::size_t>(o)].empty(); }
};

/// Samples e ~ b, steps it and files the successor under agent i's
/// observation until every observed bucket holds min_particles, the sample
/// cap is reached or the timeout fires.  `step(state, rng)` returns
/// std::pair<State, ObsId>.
template <class State, class Step>
ProcessResult<State> process_action(const ParticleBelief<State>& b, Step&& step, int num_observations,
                                    const BuildParams& params, Rng& rng) {
  if (b.empty()) throw Error("process_action on an empty belief");
  ProcessResult<State> r;
  r.buckets.resize(static_cast<std::size_t>(num_observations));
  const auto min_part = static_cast<std::size_t>(params.min_particles);
  const bool timed = params.process_timeout_ms > 0.0;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double, std::milli>(params.process_timeout_ms));
  int short_buckets = 0;
  for (;;) {
    auto [next, o] = step(b.sample(rng), rng);
    if (o < 0 || o >= num_observations) throw DimensionError("process_action: observation out of range");
    auto& bucket = r.buckets[static_cast<std::size_t>(o)];
    if (bucket.empty() && min_part > 1) ++short_buckets;
    bucket.add(std::move(next));
    if (bucket.size() == min_part && min_part > 1) --short_buckets;
    ++r.samples;
    if (short_buckets == 0) break;
    if (r.samples >= params.process_max_samples) break;
    if (timed && (r.samples & 255) == 0 && std::chrono::steady_clock::now() >= deadline) break;
  }
  r.starved = short_buckets > 0;
  return r;
}

struct BuildTraceChild {
  ObsId obs = 0;
  long count = 0;
  double weight = 0.0;
  NodeId target = 0;
  bool created = false;
  bool self_loop = false;
  double distance = std::numeric_limits<double>::quiet_NaN();
};

struct BuildTraceNode {
  NodeId node = 0;
  double weight = 0.0;
  std::size_t belief_size = 0;
  ActionId action = 0;
  std::optional<JointIndex> joint_action;
  long samples = 0;
  bool starved = false;
  std::vector<BuildTraceChild> children;
};

struct BuildTrace {
  int agent = 0;
  std::vector<BuildTraceNode> expansions;
  long pomcp_simulations = 0;

  bool starved() const;
};

nlohmann::json to_json(const BuildTraceNode& n);

namespace detail {

/// Weight-ordered node-by-node construction shared by the best-response
/// builder and the heuristic initializer.  `plan(belief, rng)` returns a
/// NodeDecision; `step(state, decision, rng)` returns (next, o_i).
template <class State, class Plan, class Step>
Fsc build_controller(int agent, int num_actions, int num_observations, const ParticleBelief<State>& b0,
                     Plan&& plan, Step&& step, const BuildParams& params, Rng& rng, BuildTrace* trace) {
  params.validate();
  if (b0.empty()) throw Error("controller construction needs a non-empty initial belief");
  struct Node {
    ParticleBelief<State> belief;
    Histogram<State> hist;
    NodeDecision decision;
    double weight = 0.0;
    bool open = true;
  };
  std::vector<Node> nodes;
  Fsc fsc(agent, num_actions, num_observations);
  long sims = 0;
  const auto create = [&](ParticleBelief<State> belief, double weight) {
    Node n;
    n.decision = plan(belief, rng);
    sims += n.decision.simulations;
    n.hist = belief.histogram();
    n.belief = std::move(belief);
    n.weight = weight;
    fsc.add_node(n.decision.action);
    nodes.push_back(std::move(n));
  };
  create(b0, 1.0);

  for (;;) {
    int cur = -1;
    for (int k = 0; k < static_cast<int>(nodes.size()); ++k)
      if (nodes[k].open && (cur < 0 || nodes[k].weight > nodes[cur].weight)) cur = k;
    if (cur < 0) break;
    nodes[cur].open = false;
    const NodeDecision decision = nodes[cur].decision;
    auto pr = process_action(
        nodes[cur].belief, [&](const State& s, Rng& r) { return step(s, decision, r); }, num_observations, params,
        rng);
    const double parent_weight = nodes[cur].weight;
    BuildTraceNode rec;
    rec.node = cur;
    rec.weight = parent_weight;
    rec.belief_size = nodes[cur].belief.size();
    rec.action = decision.action;
    rec.joint_action = decision.joint_action;
    rec.samples = pr.samples;
    rec.starved = pr.starved;
    nodes[cur].belief = {};

    for (ObsId o = 0; o < num_observations; ++o) {
      BuildTraceChild child;
      child.obs = o;
      if (!pr.observed(o)) {
        fsc.set_next(cur, o, cur);
        child.target = cur;
        child.self_loop = true;
        rec.children.push_back(child);
        continue;
      }
      auto& bucket = pr.buckets[static_cast<std::size_t>(o)];
      child.count = static_cast<long>(bucket.size());
      child.weight = static_cast<double>(bucket.size()) / static_cast<double>(pr.samples) * parent_weight;
      const auto hist = bucket.histogram();
      int closest = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < static_cast<int>(nodes.size()); ++k) {
        const double d = belief_distance(hist, nodes[k].hist);
        if (d < best) {
          best = d;
          closest = k;
        }
      }
      child.distance = best;
      if (best <= params.epsilon || static_cast<int>(nodes.size()) >= params.max_nodes) {
        nodes[closest].weight += child.weight;
        child.target = closest;
      } else {
        child.target = static_cast<NodeId>(nodes.size());
        child.created = true;
        create(std::move(bucket), child.weight);
      }
      fsc.set_next(cur, o, child.target);
      rec.children.push_back(child);
    }
    if (trace) trace->expansions.push_back(std::move(rec));
  }
  if (trace) {
    trace->agent = agent;
    trace->pomcp_simulations += sims;
  }
  return fsc;
}

}  // namespace detail

/// process_action for a best-response model and a fixed individual action.
ProcessResult<ExtendedState> process_action(const ParticleBelief<ExtendedState>& b, const BestResponseModel& model,
                                            ActionId action, const BuildParams& params, Rng& rng);

/// Best-response controller for model.agent(), grown from b0_br with POMCP
/// choosing each node's action.  At most params.max_nodes nodes.
Fsc compute_fsc(const ParticleBelief<ExtendedState>& b0_br, const BestResponseModel& model,
                const BuildParams& params, const PomcpParams& pomcp, Rng& rng, BuildTrace* trace = nullptr);

}  // namespace mcjesp
