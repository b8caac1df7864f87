#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcjesp/rng.hpp"
#include "mcjesp/types.hpp"

namespace mcjesp {

/// One sampled environment transition.
struct Transition {
  StateId next = 0;
  JointIndex obs = 0;
  double reward = 0.0;
};

/// Black-box generative Dec-POMDP simulator.
///
/// States are opaque discrete ids; the solver never reads probability tables
/// through this interface.  For a fixed input and rng stream `step` must be
/// replayable.
class DecPomdpSimulator {
 public:
  virtual ~DecPomdpSimulator() = default;

  virtual int num_agents() const = 0;
  virtual int num_states() const = 0;
  virtual const JointSpace& action_space() const = 0;
  virtual const JointSpace& observation_space() const = 0;
  virtual double discount() const = 0;

  virtual StateId sample_initial(Rng& rng) const = 0;
  virtual Transition step(StateId s, JointIndex a, Rng& rng) const = 0;
};

/// A support point of the exact one-step distribution.
struct Outcome {
  StateId next;
  JointIndex obs;
  double prob;
};

/// Raw tables as produced by the parser; indices are dense.
struct DecPomdpTables {
  std::vector<std::string> state_names;
  std::vector<std::vector<std::string>> action_names;       // per agent
  std::vector<std::vector<std::string>> observation_names;  // per agent
  std::vector<double> transition;   // [s][a][s']
  std::vector<double> observation;  // [a][s'][o]
  std::vector<double> reward;       // [s][a]
  std::vector<double> initial_belief;
  double discount = 0.0;
};

/// Explicit tabular Dec-POMDP.  Immutable after construction; also serves as
/// its own generative simulator.
class ExplicitDecPomdp final : public DecPomdpSimulator {
 public:
  /// Validates the tables (rows within `tolerance` of 1) and renormalizes.
  explicit ExplicitDecPomdp(DecPomdpTables tables, double tolerance = 1e-6);

  int num_agents() const override { return actions_.num_agents(); }
  int num_states() const override { return static_cast<int>(t_.state_names.size()); }
  const JointSpace& action_space() const override { return actions_; }
  const JointSpace& observation_space() const override { return observations_; }
  double discount() const override { return t_.discount; }

  StateId sample_initial(Rng& rng) const override;
  Transition step(StateId s, JointIndex a, Rng& rng) const override;

  double transition(StateId s, JointIndex a, StateId next) const;
  double observation(JointIndex a, StateId next, JointIndex o) const;
  double reward(StateId s, JointIndex a) const;
  const std::vector<double>& initial_belief() const { return t_.initial_belief; }

  /// Joint distribution over (s', o) for (s, a), sorted by (s', o).  The
  /// reward is deterministic given (s, a): see `reward`.
  const std::vector<Outcome>& exact_probs(StateId s, JointIndex a) const;

  double min_reward() const;
  double max_reward() const;

  const DecPomdpTables& tables() const { return t_; }
  const std::string& state_name(StateId s) const { return t_.state_names.at(s); }
  const std::string& action_name(int agent, ActionId a) const { return t_.action_names.at(agent).at(a); }
  const std::string& observation_name(int agent, ObsId o) const {
    return t_.observation_names.at(agent).at(o);
  }

 private:
  void check(StateId s, JointIndex a) const;

  DecPomdpTables t_;
  JointSpace actions_;
  JointSpace observations_;
  std::vector<std::vector<Outcome>> support_;     // [s][a]
  std::vector<std::vector<double>> cumulative_;   // [s][a]
  std::vector<double> initial_cumulative_;
};

/// Free-function forms mirroring the member API.
inline const std::vector<Outcome>& exact_probs(const ExplicitDecPomdp& m, StateId s, JointIndex a) {
  return m.exact_probs(s, a);
}
inline Transition simulate_step(const ExplicitDecPomdp& m, StateId s, JointIndex a, Rng& rng) {
  return m.step(s, a, rng);
}

/// Write the model back as `.dpomdp` text (explicit non-zero entries).
void write_dpomdp(const ExplicitDecPomdp& model, std::ostream& out);

/// Debug dump; schema in docs/formats.md.
nlohmann::json model_to_json(const ExplicitDecPomdp& model);

/// Max minus min reward observed along a uniformly random walk of `steps`
/// steps, restarting from the initial distribution every `horizon` steps.
double probe_reward_span(const DecPomdpSimulator& sim, int steps, int horizon, Rng& rng);

}  // namespace mcjesp
