#include "mcjesp/fsc_builder.hpp"

#include <cmath>

namespace mcjesp {

void BuildParams::validate() const {
  if (max_nodes < 1) throw Error("max_nodes must be >= 1");
  if (min_particles < 1) throw Error("min_particles must be >= 1");
  if (!(epsilon >= 0.0)) throw Error("epsilon must be >= 0");
  if (process_max_samples < 1) throw Error("process_max_samples must be >= 1");
  if (process_timeout_ms < 0.0) throw Error("process timeout must be >= 0");
}

bool BuildTrace::starved() const {
  for (const auto& e : expansions)
    if (e.starved) return true;
  return false;
}

nlohmann::json to_json(const BuildTraceNode& n) {
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : n.children) {
    nlohmann::json j = {{"obs", c.obs},         {"count", c.count},         {"weight", c.weight},
                        {"target", c.target},   {"created", c.created},     {"self_loop", c.self_loop}};
    j["distance"] = std::isnan(c.distance) ? nlohmann::json(nullptr) : nlohmann::json(c.distance);
    children.push_back(std::move(j));
  }
  nlohmann::json j = {{"node", n.node},
                      {"weight", n.weight},
                      {"belief_size", n.belief_size},
                      {"action", n.action},
                      {"samples", n.samples},
                      {"starved", n.starved},
                      {"children", std::move(children)}};
  j["joint_action"] = n.joint_action ? nlohmann::json(*n.joint_action) : nlohmann::json(nullptr);
  return j;
}

ProcessResult<ExtendedState> process_action(const ParticleBelief<ExtendedState>& b, const BestResponseModel& model,
                                            ActionId action, const BuildParams& params, Rng& rng) {
  return process_action(
      b,
      [&](const ExtendedState& e, Rng& r) {
        auto st = model.step(e, action, r);
        return std::pair<ExtendedState, ObsId>(st.next, st.obs);
      },
      model.num_observations(), params, rng);
}

Fsc compute_fsc(const ParticleBelief<ExtendedState>& b0_br, const BestResponseModel& model,
                const BuildParams& params, const PomcpParams& pomcp, Rng& rng, BuildTrace* trace) {
  const auto plan = [&](const ParticleBelief<ExtendedState>& b, Rng& r) {
    const auto res = pomcp_plan(b, model, pomcp, r);
    return NodeDecision{res.action, std::nullopt, res.simulations};
  };
  const auto step = [&](const ExtendedState& e, const NodeDecision& d, Rng& r) {
    auto st = model.step(e, d.action, r);
    return std::pair<ExtendedState, ObsId>(st.next, st.obs);
  };
  return detail::build_controller(model.agent(), model.num_actions(), model.num_observations(), b0_br, plan, step,
                                  params, rng, trace);
}

}  // namespace mcjesp
