#include "mcjesp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace mcjesp {

JointSpace::JointSpace(std::vector<int> sizes) : sizes_(std::move(sizes)), strides_(sizes_.size()) {
  if (sizes_.empty()) throw DimensionError("joint space needs at least one agent");
  std::int64_t total = 1;
  for (int k = static_cast<int>(sizes_.size()) - 1; k >= 0; --k) {
    if (sizes_[k] < 1) throw DimensionError("empty per-agent alphabet");
    strides_[k] = static_cast<int>(total);
    total *= sizes_[k];
    if (total > std::numeric_limits<int>::max()) throw DimensionError("joint space too large");
  }
  total_ = static_cast<int>(total);
}

JointIndex JointSpace::encode(std::span<const int> components) const {
  if (components.size() != sizes_.size()) throw DimensionError("joint arity mismatch");
  JointIndex j = 0;
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    if (components[k] < 0 || components[k] >= sizes_[k]) throw DimensionError("component out of range");
    j += components[k] * strides_[k];
  }
  return j;
}

void JointSpace::decode(JointIndex joint, std::span<int> components) const {
  if (joint < 0 || joint >= total_) throw DimensionError("joint index out of range");
  for (std::size_t k = 0; k < sizes_.size(); ++k) components[k] = (joint / strides_[k]) % sizes_[k];
}

std::vector<int> JointSpace::decode(JointIndex joint) const {
  std::vector<int> out(sizes_.size());
  decode(joint, out);
  return out;
}

namespace {

std::vector<int> alphabet_sizes(const std::vector<std::vector<std::string>>& names) {
  std::vector<int> out;
  for (const auto& n : names) out.push_back(static_cast<int>(n.size()));
  return out;
}

// Checks that `row` is a probability vector within `tol`, then rescales it.
void normalize_row(std::span<double> row, double tol, const std::string& where) {
  double sum = 0.0;
  for (double& p : row) {
    if (p < -tol || p > 1.0 + tol || !std::isfinite(p))
      throw ValidationError(fmt::format("{}: probability {} outside [0,1]", where, p));
    p = std::clamp(p, 0.0, 1.0);
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol)
    throw ValidationError(fmt::format("{}: row sums to {} (tolerance {})", where, sum, tol));
  // Leave rows that already sum to 1 up to rounding untouched so that
  // re-parsing a written model is the identity.
  if (std::abs(sum - 1.0) > 1e-14)
    for (double& p : row) p /= sum;
}

}  // namespace

ExplicitDecPomdp::ExplicitDecPomdp(DecPomdpTables tables, double tolerance) : t_(std::move(tables)) {
  if (t_.action_names.empty() || t_.action_names.size() != t_.observation_names.size())
    throw ValidationError("agent count mismatch between actions and observations");
  if (t_.action_names.size() > static_cast<std::size_t>(kMaxAgents))
    throw ValidationError(fmt::format("at most {} agents supported", kMaxAgents));
  if (t_.state_names.empty()) throw ValidationError("no states");
  actions_ = JointSpace(alphabet_sizes(t_.action_names));
  observations_ = JointSpace(alphabet_sizes(t_.observation_names));
  if (!(t_.discount >= 0.0 && t_.discount < 1.0))
    throw ValidationError(fmt::format("discount {} outside [0,1)", t_.discount));

  const std::size_t ns = t_.state_names.size();
  const std::size_t na = actions_.total();
  const std::size_t no = observations_.total();
  if (t_.transition.size() != ns * na * ns || t_.observation.size() != na * ns * no ||
      t_.reward.size() != ns * na || t_.initial_belief.size() != ns)
    throw ValidationError("table dimensions do not match the declared alphabets");

  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a)
      normalize_row(std::span(t_.transition).subspan((s * na + a) * ns, ns), tolerance,
                    fmt::format("T({}, joint action {})", t_.state_names[s], a));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t s2 = 0; s2 < ns; ++s2)
      normalize_row(std::span(t_.observation).subspan((a * ns + s2) * no, no), tolerance,
                    fmt::format("O(joint action {}, {})", a, t_.state_names[s2]));
  normalize_row(t_.initial_belief, tolerance, "start");
  for (double r : t_.reward)
    if (!std::isfinite(r)) throw ValidationError("non-finite reward");

  support_.resize(ns * na);
  cumulative_.resize(ns * na);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      auto& sup = support_[s * na + a];
      for (std::size_t s2 = 0; s2 < ns; ++s2) {
        const double pt = t_.transition[(s * na + a) * ns + s2];
        if (pt == 0.0) continue;
        for (std::size_t o = 0; o < no; ++o) {
          const double po = t_.observation[(a * ns + s2) * no + o];
          if (po == 0.0) continue;
          sup.push_back({static_cast<StateId>(s2), static_cast<JointIndex>(o), pt * po});
        }
      }
      auto& cum = cumulative_[s * na + a];
      cum.reserve(sup.size());
      double acc = 0.0;
      for (const auto& x : sup) cum.push_back(acc += x.prob);
    }
  }
  double acc = 0.0;
  for (double p : t_.initial_belief) initial_cumulative_.push_back(acc += p);
}

void ExplicitDecPomdp::check(StateId s, JointIndex a) const {
  if (s < 0 || s >= num_states()) throw DimensionError(fmt::format("state {} out of range", s));
  if (a < 0 || a >= actions_.total()) throw DimensionError(fmt::format("joint action {} out of range", a));
}

namespace {

// Index into a cumulative table; `u` in [0,1) is scaled by the last entry so
// rounding in the partial sums can never fall off the end.
std::size_t pick(const std::vector<double>& cumulative, double u) {
  const double x = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace

StateId ExplicitDecPomdp::sample_initial(Rng& rng) const {
  return static_cast<StateId>(pick(initial_cumulative_, rng.uniform()));
}

Transition ExplicitDecPomdp::step(StateId s, JointIndex a, Rng& rng) const {
  check(s, a);
  const std::size_t idx = static_cast<std::size_t>(s) * actions_.total() + a;
  const auto& o = support_[idx][pick(cumulative_[idx], rng.uniform())];
  return {o.next, o.obs, t_.reward[idx]};
}

double ExplicitDecPomdp::transition(StateId s, JointIndex a, StateId next) const {
  check(s, a);
  if (next < 0 || next >= num_states()) throw DimensionError("next state out of range");
  return t_.transition[(static_cast<std::size_t>(s) * actions_.total() + a) * num_states() + next];
}

double ExplicitDecPomdp::observation(JointIndex a, StateId next, JointIndex o) const {
  check(next, a);
  if (o < 0 || o >= observations_.total()) throw DimensionError("joint observation out of range");
  return t_.observation[(static_cast<std::size_t>(a) * num_states() + next) * observations_.total() + o];
}

double ExplicitDecPomdp::reward(StateId s, JointIndex a) const {
  check(s, a);
  return t_.reward[static_cast<std::size_t>(s) * actions_.total() + a];
}

const std::vector<Outcome>& ExplicitDecPomdp::exact_probs(StateId s, JointIndex a) const {
  check(s, a);
  return support_[static_cast<std::size_t>(s) * actions_.total() + a];
}

double ExplicitDecPomdp::min_reward() const { return *std::min_element(t_.reward.begin(), t_.reward.end()); }
double ExplicitDecPomdp::max_reward() const { return *std::max_element(t_.reward.begin(), t_.reward.end()); }

void write_dpomdp(const ExplicitDecPomdp& m, std::ostream& out) {
  const auto& t = m.tables();
  const int n = m.num_agents();
  const auto joint_name = [&](JointIndex j, const JointSpace& space,
                              const std::vector<std::vector<std::string>>& names) {
    std::string s;
    for (int k = 0; k < n; ++k) {
      if (k) s += ' ';
      s += names[k][space.component(j, k)];
    }
    return s;
  };
  fmt::print(out, "agents: {}\ndiscount: {}\nvalues: reward\nstates:", n, t.discount);
  for (const auto& s : t.state_names) fmt::print(out, " {}", s);
  fmt::print(out, "\nstart:\n");
  for (std::size_t s = 0; s < t.initial_belief.size(); ++s)
    fmt::print(out, "{}{}", s ? " " : "", t.initial_belief[s]);
  fmt::print(out, "\nactions:\n");
  for (const auto& a : t.action_names) fmt::print(out, "{}\n", fmt::join(a, " "));
  fmt::print(out, "observations:\n");
  for (const auto& o : t.observation_names) fmt::print(out, "{}\n", fmt::join(o, " "));

  const auto& A = m.action_space();
  const auto& O = m.observation_space();
  for (JointIndex a = 0; a < A.total(); ++a)
    for (StateId s = 0; s < m.num_states(); ++s)
      for (StateId s2 = 0; s2 < m.num_states(); ++s2)
        if (double p = m.transition(s, a, s2); p != 0.0)
          fmt::print(out, "T: {} : {} : {} : {}\n", joint_name(a, A, t.action_names), t.state_names[s],
                     t.state_names[s2], p);
  for (JointIndex a = 0; a < A.total(); ++a)
    for (StateId s2 = 0; s2 < m.num_states(); ++s2)
      for (JointIndex o = 0; o < O.total(); ++o)
        if (double p = m.observation(a, s2, o); p != 0.0)
          fmt::print(out, "O: {} : {} : {} : {}\n", joint_name(a, A, t.action_names), t.state_names[s2],
                     joint_name(o, O, t.observation_names), p);
  for (JointIndex a = 0; a < A.total(); ++a)
    for (StateId s = 0; s < m.num_states(); ++s)
      if (double r = m.reward(s, a); r != 0.0)
        fmt::print(out, "R: {} : {} : * : * : {}\n", joint_name(a, A, t.action_names), t.state_names[s], r);
}

nlohmann::json model_to_json(const ExplicitDecPomdp& m) {
  using nlohmann::json;
  const auto& t = m.tables();
  json j;
  j["format"] = "mcjesp-model";
  j["version"] = 1;
  j["num_agents"] = m.num_agents();
  j["discount"] = t.discount;
  j["states"] = t.state_names;
  j["actions"] = t.action_names;
  j["observations"] = t.observation_names;
  j["initial_belief"] = t.initial_belief;
  json trans = json::array();
  json rewards = json::array();
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (JointIndex a = 0; a < m.action_space().total(); ++a) {
      json row = json::array();
      for (const auto& o : m.exact_probs(s, a)) row.push_back({o.next, o.obs, o.prob});
      trans.push_back({{"state", s}, {"joint_action", a}, {"outcomes", row}});
      rewards.push_back({{"state", s}, {"joint_action", a}, {"reward", m.reward(s, a)}});
    }
  }
  j["dynamics"] = trans;
  j["rewards"] = rewards;
  return j;
}

double probe_reward_span(const DecPomdpSimulator& sim, int steps, int horizon, Rng& rng) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  StateId s = sim.sample_initial(rng);
  const auto na = static_cast<std::uint64_t>(sim.action_space().total());
  for (int t = 0; t < steps; ++t) {
    if (horizon > 0 && t % horizon == 0) s = sim.sample_initial(rng);
    const auto tr = sim.step(s, static_cast<JointIndex>(rng.below(na)), rng);
    lo = std::min(lo, tr.reward);
    hi = std::max(hi, tr.reward);
    s = tr.next;
  }
  return steps > 0 ? hi - lo : 0.0;
}

}  // namespace mcjesp
