#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <limits>
#include <vector>

#include "mcjesp/belief.hpp"
#include "mcjesp/rng.hpp"
#include "mcjesp/types.hpp"

namespace mcjesp {

template <class State>
struct PomdpStep {
  State next;
  ObsId obs;
  double reward;
};

/// A single-agent generative POMDP as seen by the planner.
template <class M>
concept GenerativePomdp = requires(const M& m, const typename M::State& s, ActionId a, Rng& rng) {
  { m.num_actions() } -> std::convertible_to<int>;
  { m.discount() } -> std::convertible_to<double>;
  { m.step(s, a, rng) } -> std::same_as<PomdpStep<typename M::State>>;
};

struct PomcpParams {
  /// Wall-clock budget per search; 0 disables the clock.
  double timeout_ms = 1000.0;
  /// Simulation budget per search; 0 means unlimited (clock only).
  long max_simulations = 0;
  /// UCB1 exploration constant; <= 0 means "resolve from the return span".
  double exploration = 0.0;
  int max_depth = 88;
  /// Particles drawn for a fresh root belief (best-response initial belief).
  int num_particles = 1000;
};

struct PomcpResult {
  ActionId action = 0;
  long simulations = 0;
  std::vector<long> visits;
  std::vector<double> values;
};

namespace detail {

template <GenerativePomdp Model>
class PomcpSearch {
 public:
  using State = typename Model::State;

  PomcpSearch(const Model& model, const PomcpParams& params, Rng& rng)
      : model_(model),
        params_(params),
        rng_(rng),
        num_actions_(model.num_actions()),
        gamma_(model.discount()),
        c_(params.exploration > 0.0 ? params.exploration : 1.0) {}

  PomcpResult run(const ParticleBelief<State>& belief) {
    if (belief.empty()) throw Error("POMCP needs a non-empty belief");
    if (params_.max_depth < 1) throw Error("POMCP max_depth must be >= 1");
    const int root = new_vnode();
    PomcpResult res;
    if (num_actions_ == 1) {
      res.visits.assign(1, 0);
      res.values.assign(1, 0.0);
      return res;
    }
    const bool timed = params_.timeout_ms > 0.0;
    const bool counted = params_.max_simulations > 0;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double, std::milli>(params_.timeout_ms));
    long sims = 0;
    do {
      simulate(belief.sample(rng_), root, 0);
      ++sims;
      if (counted && sims >= params_.max_simulations) break;
      if (!counted && !timed) break;
    } while (!timed || std::chrono::steady_clock::now() < deadline);

    res.simulations = sims;
    long best_visits = -1;
    for (ActionId a = 0; a < num_actions_; ++a) {
      const auto& q = qnodes_[static_cast<std::size_t>(vnodes_[root].first_q + a)];
      res.visits.push_back(q.visits);
      res.values.push_back(q.value);
      if (q.visits > best_visits) {
        best_visits = q.visits;
        res.action = a;
      }
    }
    return res;
  }

 private:
  struct QNode {
    long visits = 0;
    double value = 0.0;
    std::vector<std::pair<ObsId, int>> children;
  };
  struct VNode {
    long visits = 0;
    int first_q = 0;
  };

  int new_vnode() {
    vnodes_.push_back({0, static_cast<int>(qnodes_.size())});
    qnodes_.resize(qnodes_.size() + static_cast<std::size_t>(num_actions_));
    return static_cast<int>(vnodes_.size()) - 1;
  }

  ActionId select(int v) const {
    const auto& node = vnodes_[v];
    const double log_n = std::log(static_cast<double>(std::max<long>(node.visits, 1)));
    ActionId best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (ActionId a = 0; a < num_actions_; ++a) {
      const auto& q = qnodes_[static_cast<std::size_t>(node.first_q + a)];
      if (q.visits == 0) return a;
      const double score = q.value + c_ * std::sqrt(log_n / static_cast<double>(q.visits));
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }

  double rollout(State s, int depth) {
    double ret = 0.0;
    double disc = 1.0;
    for (; depth < params_.max_depth; ++depth) {
      const auto a = static_cast<ActionId>(rng_.below(static_cast<std::uint64_t>(num_actions_)));
      auto st = model_.step(s, a, rng_);
      ret += disc * st.reward;
      disc *= gamma_;
      s = std::move(st.next);
    }
    return ret;
  }

  double simulate(const State& s, int v, int depth) {
    if (depth >= params_.max_depth) return 0.0;
    const ActionId a = select(v);
    auto st = model_.step(s, a, rng_);
    const auto qi = static_cast<std::size_t>(vnodes_[v].first_q + a);
    int child = -1;
    for (const auto& [o, c] : qnodes_[qi].children)
      if (o == st.obs) {
        child = c;
        break;
      }
    double total;
    if (child < 0) {
      child = new_vnode();
      qnodes_[qi].children.emplace_back(st.obs, child);
      total = st.reward + gamma_ * rollout(std::move(st.next), depth + 1);
      vnodes_[child].visits += 1;
    } else {
      total = st.reward + gamma_ * simulate(st.next, child, depth + 1);
    }
    auto& q = qnodes_[qi];
    vnodes_[v].visits += 1;
    q.visits += 1;
    q.value += (total - q.value) / static_cast<double>(q.visits);
    return total;
  }

  const Model& model_;
  const PomcpParams& params_;
  Rng& rng_;
  int num_actions_;
  double gamma_;
  double c_;
  std::vector<VNode> vnodes_;
  std::vector<QNode> qnodes_;
};

}  // namespace detail

/// Online UCT search from a particle belief.  Each simulation samples a root
/// particle, descends by UCB1, adds one new node and finishes with a uniform
/// random rollout truncated at `max_depth`.  Returns the most-visited root
/// action (ties: lowest index).  Stops at whichever of the wall-clock or
/// simulation budget is hit first; a single-action model returns at once.
template <GenerativePomdp Model>
PomcpResult pomcp_plan(const ParticleBelief<typename Model::State>& belief, const Model& model,
                       const PomcpParams& params, Rng& rng) {
  detail::PomcpSearch<Model> search(model, params, rng);
  return search.run(belief);
}

}  // namespace mcjesp
