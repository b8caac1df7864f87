#include "mcjesp/local_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>

#include <fmt/format.h>

#include "mcjesp/best_response.hpp"
#include "mcjesp/heuristic_init.hpp"
#include "mcjesp/parallel.hpp"

namespace mcjesp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Score {
  double value;
  double std_error;
};

Score evaluate(const JointPolicy& policy, const DecPomdpSimulator& sim, const ExplicitDecPomdp* model,
               const SearchParams& p, int workers, Rng rng) {
  if (p.eval_mode == EvalMode::exact) return {evaluate_exact(policy, *model, p.exact_tol), 0.0};
  const auto mc = evaluate_mc(policy, sim, p.eval_sims, p.eval_cutoff, rng, workers);
  return {mc.mean, mc.std_error};
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::string to_string(InitMode m) { return m == InitMode::heuristic ? "heuristic" : "trivial"; }
std::string to_string(EvalMode m) { return m == EvalMode::mc ? "mc" : "exact"; }

InitMode parse_init_mode(const std::string& s) {
  if (s == "heuristic") return InitMode::heuristic;
  if (s == "trivial") return InitMode::trivial;
  throw Error(fmt::format("unknown init mode '{}'", s));
}

EvalMode parse_eval_mode(const std::string& s) {
  if (s == "mc") return EvalMode::mc;
  if (s == "exact") return EvalMode::exact;
  throw Error(fmt::format("unknown evaluation mode '{}'", s));
}

void SearchParams::validate() const {
  build.validate();
  if (pomcp.timeout_ms < 0.0) throw Error("POMCP timeout must be >= 0");
  if (pomcp.max_simulations < 0) throw Error("POMCP simulation budget must be >= 0");
  if (pomcp.timeout_ms == 0.0 && pomcp.max_simulations == 0)
    throw Error("POMCP needs a timeout or a simulation budget");
  if (pomcp.max_depth < 1) throw Error("POMCP depth must be >= 1");
  if (pomcp.num_particles < 1) throw Error("particle count must be >= 1");
  if (eval_sims < 1) throw Error("eval_sims must be >= 1");
  if (!(eval_cutoff > 0.0 && eval_cutoff < 1.0)) throw Error("eval_cutoff must lie in (0,1)");
  if (!(exact_tol > 0.0)) throw Error("exact_tol must be > 0");
  if (max_iterations < 1) throw Error("max_iterations must be >= 1");
  if (exploration_probe_steps < 1) throw Error("exploration_probe_steps must be >= 1");
}

nlohmann::json to_json(const SearchParams& p) {
  return {{"max_fsc", p.build.max_nodes},
          {"min_particles", p.build.min_particles},
          {"epsilon", p.build.epsilon},
          {"process_timeout_ms", p.build.process_timeout_ms},
          {"process_max_samples", p.build.process_max_samples},
          {"pomcp_timeout_ms", p.pomcp.timeout_ms},
          {"pomcp_budget_sims", p.pomcp.max_simulations},
          {"pomcp_exploration", p.pomcp.exploration},
          {"pomcp_max_depth", p.pomcp.max_depth},
          {"pomcp_particles", p.pomcp.num_particles},
          {"init", to_string(p.init)},
          {"eval_mode", to_string(p.eval_mode)},
          {"eval_sims", p.eval_sims},
          {"eval_cutoff", p.eval_cutoff},
          {"exact_tol", p.exact_tol},
          {"kappa", p.kappa},
          {"max_iterations", p.max_iterations},
          {"exploration_probe_steps", p.exploration_probe_steps}};
}

nlohmann::json to_json(const IterationRecord& r, bool with_time) {
  nlohmann::json j = {{"iteration", r.iteration},
                      {"agent", r.agent},
                      {"value", r.value},
                      {"stderr", r.std_error},
                      {"accepted", r.accepted},
                      {"nNI", r.no_improvement},
                      {"best_value", r.best_value},
                      {"fsc_sizes", r.sizes},
                      {"pomcp_simulations", r.pomcp_simulations},
                      {"starved", r.starved}};
  if (with_time) j["wall_time_s"] = r.seconds;
  return j;
}

double resolve_exploration(const DecPomdpSimulator& sim, const SearchParams& params, Rng& rng) {
  if (params.pomcp.exploration > 0.0) return params.pomcp.exploration;
  const double span = probe_reward_span(sim, params.exploration_probe_steps, params.pomcp.max_depth, rng);
  if (span <= 0.0) return 1.0;
  const double g = sim.discount();
  const double steps = g < 1.0 ? (1.0 - std::pow(g, params.pomcp.max_depth)) / (1.0 - g) : params.pomcp.max_depth;
  return span * steps;
}

JointPolicy initial_policy(const DecPomdpSimulator& sim, const SearchParams& params, Rng& rng,
                           std::vector<BuildTrace>* traces) {
  params.validate();
  BuildParams build = params.build;
  if (params.pomcp.timeout_ms == 0.0) build.process_timeout_ms = 0.0;
  PomcpParams pomcp = params.pomcp;
  if (params.init == InitMode::heuristic) {
    Rng probe = rng.split(~std::uint64_t{0});
    pomcp.exploration = resolve_exploration(sim, params, probe);
  }
  JointPolicy policy;
  for (int i = 0; i < sim.num_agents(); ++i) {
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    if (params.init == InitMode::trivial) {
      policy.fscs.push_back(trivial_fsc(sim, i, r));
      continue;
    }
    BuildTrace trace;
    policy.fscs.push_back(build_heuristic_fsc(sim, i, build, pomcp, r, traces ? &trace : nullptr));
    if (traces) traces->push_back(std::move(trace));
  }
  return policy;
}

SearchResult local_search(const DecPomdpSimulator& sim, const ExplicitDecPomdp* explicit_model,
                          const JointPolicy& init, const SearchParams& params, Rng& rng) {
  params.validate();
  if (params.eval_mode == EvalMode::exact && explicit_model == nullptr)
    throw Error("exact evaluation needs an explicit model");
  check_compatible(init, sim);
  const auto t0 = Clock::now();
  const int n = sim.num_agents();

  BuildParams build = params.build;
  if (params.pomcp.timeout_ms == 0.0) build.process_timeout_ms = 0.0;
  PomcpParams pomcp = params.pomcp;
  Rng probe = rng.split(~std::uint64_t{0});
  pomcp.exploration = resolve_exploration(sim, params, probe);

  SearchResult res;
  res.exploration = pomcp.exploration;
  res.policy = init;
  const auto initial = evaluate(init, sim, explicit_model, params, params.workers, rng.split(~std::uint64_t{1}));
  res.value = res.initial_value = initial.value;
  res.std_error = initial.std_error;

  int no_improvement = 0;
  int agent = 0;
  for (int k = 0; k < params.max_iterations && no_improvement < n; ++k) {
    const auto ti = Clock::now();
    Rng it = rng.split(static_cast<std::uint64_t>(k));
    Rng build_rng = it.split(0);
    const BestResponseModel model(sim, res.policy, agent);
    const auto b0 = initial_extended_belief(model, pomcp.num_particles, build_rng);
    BuildTrace trace;
    JointPolicy candidate = res.policy;
    candidate.fscs[agent] = compute_fsc(b0, model, build, pomcp, build_rng, &trace);
    const auto score = evaluate(candidate, sim, explicit_model, params, params.workers, it.split(1));

    IterationRecord rec;
    rec.iteration = k;
    rec.agent = agent;
    rec.value = score.value;
    rec.std_error = score.std_error;
    rec.sizes = candidate.sizes();
    rec.pomcp_simulations = trace.pomcp_simulations;
    rec.starved = trace.starved();
    rec.accepted = score.value > res.value + params.kappa * score.std_error;
    if (rec.accepted) {
      res.policy = std::move(candidate);
      res.value = score.value;
      res.std_error = score.std_error;
      no_improvement = 0;
    } else {
      ++no_improvement;
    }
    rec.no_improvement = no_improvement;
    rec.best_value = res.value;
    rec.seconds = seconds_since(ti);
    res.log.push_back(std::move(rec));
    if (params.keep_traces) res.traces.push_back(std::move(trace));
    agent = (agent + 1) % n;
  }
  res.final_no_improvement = no_improvement;
  res.hit_iteration_cap = no_improvement < n;
  res.seconds = seconds_since(t0);
  return res;
}

RestartSummary run_restarts(const DecPomdpSimulator& sim, const ExplicitDecPomdp* explicit_model,
                            const SearchParams& params, int restarts, const Rng& master,
                            const std::function<void(const RestartRecord&)>& on_done) {
  if (restarts < 1) throw Error("restarts must be >= 1");
  params.validate();
  const auto t0 = Clock::now();
  const int outer = std::min(std::max(params.workers, 1), restarts);
  SearchParams inner = params;
  if (outer > 1) inner.workers = 1;

  RestartSummary summary;
  summary.runs.resize(static_cast<std::size_t>(restarts));
  std::mutex done_mutex;
  parallel_for(static_cast<std::size_t>(restarts), outer, [&](std::size_t r) {
    Rng seed = master.split(r);
    Rng init_rng = seed.split(0);
    Rng search_rng = seed.split(1);
    RestartRecord rec;
    rec.restart = static_cast<int>(r);
    std::vector<BuildTrace> init_traces;
    const auto init = initial_policy(sim, inner, init_rng, inner.keep_traces ? &init_traces : nullptr);
    rec.result = local_search(sim, explicit_model, init, inner, search_rng);
    rec.result.init_traces = std::move(init_traces);
    if (explicit_model) rec.exact_value = evaluate_exact(rec.result.policy, *explicit_model, inner.exact_tol);
    if (on_done) {
      std::lock_guard lock(done_mutex);
      on_done(rec);
    }
    summary.runs[r] = std::move(rec);
  });

  std::vector<double> scores;
  for (const auto& r : summary.runs) scores.push_back(r.score());
  summary.best = static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  summary.best_value = scores[summary.best];
  summary.mean_value = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  summary.p25 = quantile(scores, 0.25);
  summary.median = quantile(scores, 0.5);
  summary.p75 = quantile(scores, 0.75);
  summary.seconds = seconds_since(t0);
  return summary;
}

nlohmann::json to_json(const RestartRecord& r) {
  nlohmann::json log = nlohmann::json::array();
  for (const auto& it : r.result.log) log.push_back(to_json(it, false));
  nlohmann::json j = {{"restart", r.restart},
                      {"value", r.result.value},
                      {"stderr", r.result.std_error},
                      {"initial_value", r.result.initial_value},
                      {"exploration", r.result.exploration},
                      {"iterations", r.result.log.size()},
                      {"hit_iteration_cap", r.result.hit_iteration_cap},
                      {"fsc_sizes", r.result.policy.sizes()},
                      {"log", std::move(log)},
                      {"policy", policy_to_json(r.result.policy)}};
  j["exact_value"] = r.exact_value ? nlohmann::json(*r.exact_value) : nlohmann::json(nullptr);
  return j;
}

}  // namespace mcjesp
