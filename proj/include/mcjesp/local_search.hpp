#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcjesp/evaluation.hpp"
#include "mcjesp/fsc.hpp"
#include "mcjesp/fsc_builder.hpp"
#include "mcjesp/model.hpp"
#include "mcjesp/pomcp.hpp"

namespace mcjesp {

enum class InitMode { heuristic, trivial };
enum class EvalMode { mc, exact };

std::string to_string(InitMode m);
std::string to_string(EvalMode m);
InitMode parse_init_mode(const std::string& s);
EvalMode parse_eval_mode(const std::string& s);

struct SearchParams {
  BuildParams build;
  PomcpParams pomcp;
  InitMode init = InitMode::heuristic;
  EvalMode eval_mode = EvalMode::mc;
  long eval_sims = 1000000;
  double eval_cutoff = 1e-4;
  double exact_tol = 1e-6;
  /// Accept a candidate only if v > v_best + kappa * stderr.
  double kappa = 0.0;
  int max_iterations = 100;
  /// Random-walk steps used to size the UCB1 constant when
  /// pomcp.exploration <= 0.
  int exploration_probe_steps = 10000;
  int workers = 1;
  bool keep_traces = false;

  void validate() const;
};

/// Resolved settings only; `workers` and `keep_traces` are left out since
/// they never change results.
nlohmann::json to_json(const SearchParams& p);

struct IterationRecord {
  int iteration = 0;
  int agent = 0;
  double value = 0.0;
  double std_error = 0.0;
  bool accepted = false;
  int no_improvement = 0;
  double best_value = 0.0;
  std::vector<int> sizes;  // candidate joint policy
  long pomcp_simulations = 0;
  bool starved = false;
  double seconds = 0.0;
};

nlohmann::json to_json(const IterationRecord& r, bool with_time = true);

struct SearchResult {
  JointPolicy policy;
  double value = 0.0;  // v_best in the search's evaluation mode
  double std_error = 0.0;
  double initial_value = 0.0;
  double exploration = 0.0;
  std::vector<IterationRecord> log;
  bool hit_iteration_cap = false;
  int final_no_improvement = 0;
  std::vector<BuildTrace> init_traces;
  std::vector<BuildTrace> traces;  // one per iteration when keep_traces
  double seconds = 0.0;
};

/// UCB1 constant for `sim`: params.pomcp.exploration if positive, otherwise
/// the span of discounted returns over pomcp.max_depth steps implied by the
/// reward span seen on a random walk (1 when the span is 0).
double resolve_exploration(const DecPomdpSimulator& sim, const SearchParams& params, Rng& rng);

/// Heuristic or trivial initial joint policy; agent i builds from
/// rng.split(i).
JointPolicy initial_policy(const DecPomdpSimulator& sim, const SearchParams& params, Rng& rng,
                           std::vector<BuildTrace>* traces = nullptr);

/// Alternating best-response search starting at agent 0.  Each iteration
/// rebuilds one agent's controller against the others, keeps it only on a
/// strict improvement and stops after a full cycle without one (or at
/// max_iterations).  `explicit_model` is required for EvalMode::exact.
SearchResult local_search(const DecPomdpSimulator& sim, const ExplicitDecPomdp* explicit_model,
                          const JointPolicy& init, const SearchParams& params, Rng& rng);

struct RestartRecord {
  int restart = 0;
  SearchResult result;
  /// Final policy re-scored exactly when the explicit model is known.
  std::optional<double> exact_value;
  double score() const { return exact_value ? *exact_value : result.value; }
};

struct RestartSummary {
  std::vector<RestartRecord> runs;
  int best = 0;
  double best_value = 0.0;
  double mean_value = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double seconds = 0.0;
};

/// `restarts` independent searches; restart r uses master.split(r) for its
/// initial policy and search.  Restarts are spread over params.workers.
/// `on_done` is called (serialized) as each restart finishes.
RestartSummary run_restarts(const DecPomdpSimulator& sim, const ExplicitDecPomdp* explicit_model,
                            const SearchParams& params, int restarts, const Rng& master,
                            const std::function<void(const RestartRecord&)>& on_done = {});

/// Deterministic part of a restart: no wall times.
nlohmann::json to_json(const RestartRecord& r);

}  // namespace mcjesp
