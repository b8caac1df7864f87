#pragma once

#include <json.hpp>

#include "mcjesp/fsc.hpp"
#include "mcjesp/model.hpp"

namespace mcjesp {

/// Number of simulated steps t = 0..t_cut-1 such that discount^t >= cutoff.
int rollout_horizon(double discount, double cutoff);

struct McEvaluation {
  double mean = 0.0;
  double std_error = 0.0;
  long num_sims = 0;
  int t_cut = 0;
};

nlohmann::json to_json(const McEvaluation& e);

/// Monte-Carlo value of a joint policy: mean discounted return of `num_sims`
/// rollouts from the initial distribution, each truncated at t_cut.
/// Rollout k draws from its own stream keyed by k, so the result does not
/// depend on `workers`.  Advances `rng` by one draw.
McEvaluation evaluate_mc(const JointPolicy& policy, const DecPomdpSimulator& sim, long num_sims, double cutoff,
                         Rng& rng, int workers = 1);

/// Exact value from b0 of the joint policy on the cross-product chain
/// (state x controller nodes), restricted to states reachable from
/// (b0 support, start nodes).  Value iteration stops once the sup-norm
/// change drops below tol * (1 - discount) / discount.
double evaluate_exact(const JointPolicy& policy, const ExplicitDecPomdp& model, double tol = 1e-6);

}  // namespace mcjesp
