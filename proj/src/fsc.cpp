#include "mcjesp/fsc.hpp"

#include <sstream>

#include <fmt/format.h>

namespace mcjesp {

Fsc::Fsc(int agent, int num_actions, int num_observations)
    : agent_(agent), num_actions_(num_actions), num_observations_(num_observations) {
  if (num_actions < 1 || num_observations < 1) throw DimensionError("FSC alphabets must be non-empty");
}

Fsc Fsc::constant(int agent, int num_actions, int num_observations, ActionId action) {
  Fsc f(agent, num_actions, num_observations);
  f.add_node(action);
  return f;
}

NodeId Fsc::add_node(ActionId action) {
  if (action < 0 || action >= num_actions_) throw DimensionError(fmt::format("action {} out of range", action));
  const auto n = static_cast<NodeId>(actions_.size());
  actions_.push_back(action);
  next_.insert(next_.end(), static_cast<std::size_t>(num_observations_), n);
  return n;
}

void Fsc::set_next(NodeId n, ObsId o, NodeId target) {
  if (n < 0 || n >= size() || target < 0 || target >= size() || o < 0 || o >= num_observations_)
    throw DimensionError("FSC transition out of range");
  next_[static_cast<std::size_t>(n) * num_observations_ + o] = target;
}

void Fsc::set_action(NodeId n, ActionId a) {
  if (n < 0 || n >= size() || a < 0 || a >= num_actions_) throw DimensionError("FSC action out of range");
  actions_[static_cast<std::size_t>(n)] = a;
}

void Fsc::validate() const {
  if (actions_.empty()) throw DimensionError("FSC has no nodes");
  if (next_.size() != actions_.size() * static_cast<std::size_t>(num_observations_))
    throw DimensionError("FSC transition table has the wrong size");
  for (ActionId a : actions_)
    if (a < 0 || a >= num_actions_) throw DimensionError("FSC action out of range");
  for (NodeId n : next_)
    if (n < 0 || n >= size()) throw DimensionError("FSC transition target out of range");
}

std::vector<int> JointPolicy::sizes() const {
  std::vector<int> out;
  for (const auto& f : fscs) out.push_back(f.size());
  return out;
}

void check_compatible(const JointPolicy& policy, const DecPomdpSimulator& sim) {
  if (policy.num_agents() != sim.num_agents())
    throw DimensionError(fmt::format("policy has {} controllers, model has {} agents", policy.num_agents(),
                                     sim.num_agents()));
  for (int i = 0; i < policy.num_agents(); ++i) {
    const auto& f = policy.fscs[i];
    f.validate();
    if (f.agent() != i || f.num_actions() != sim.action_space().size(i) ||
        f.num_observations() != sim.observation_space().size(i))
      throw DimensionError(fmt::format("controller {} does not match agent {}'s alphabets", i, i));
  }
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string fsc_to_dot(const Fsc& fsc, const ExplicitDecPomdp* model) {
  const auto act = [&](ActionId a) {
    return model ? model->action_name(fsc.agent(), a) : std::to_string(a);
  };
  const auto obs = [&](ObsId o) {
    return model ? model->observation_name(fsc.agent(), o) : std::to_string(o);
  };
  std::ostringstream out;
  out << "digraph fsc_agent" << fsc.agent() << " {\n";
  out << "  rankdir=LR;\n";
  for (NodeId n = 0; n < fsc.size(); ++n)
    out << "  n" << n << " [label=\"n" << n << ": " << dot_escape(act(fsc.action(n))) << "\""
        << (n == 0 ? ", shape=doublecircle" : "") << "];\n";
  for (NodeId n = 0; n < fsc.size(); ++n)
    for (ObsId o = 0; o < fsc.num_observations(); ++o)
      out << "  n" << n << " -> n" << fsc.next(n, o) << " [label=\"" << dot_escape(obs(o)) << "\"];\n";
  out << "}\n";
  return out.str();
}

nlohmann::json fsc_to_json(const Fsc& fsc, const ExplicitDecPomdp* model) {
  nlohmann::json j;
  j["agent"] = fsc.agent();
  j["num_actions"] = fsc.num_actions();
  j["num_observations"] = fsc.num_observations();
  auto nodes = nlohmann::json::array();
  for (NodeId n = 0; n < fsc.size(); ++n) {
    std::vector<NodeId> next;
    for (ObsId o = 0; o < fsc.num_observations(); ++o) next.push_back(fsc.next(n, o));
    nlohmann::json node{{"action", fsc.action(n)}, {"next", next}};
    if (model) node["action_name"] = model->action_name(fsc.agent(), fsc.action(n));
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  if (model) j["observation_names"] = model->tables().observation_names.at(fsc.agent());
  return j;
}

Fsc fsc_from_json(const nlohmann::json& j) {
  try {
    Fsc f(j.at("agent").get<int>(), j.at("num_actions").get<int>(), j.at("num_observations").get<int>());
    const auto& nodes = j.at("nodes");
    for (const auto& node : nodes) f.add_node(node.at("action").get<ActionId>());
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const auto next = nodes[n].at("next").get<std::vector<NodeId>>();
      if (static_cast<int>(next.size()) != f.num_observations())
        throw DimensionError(fmt::format("node {} has {} transitions, expected {}", n, next.size(),
                                         f.num_observations()));
      for (ObsId o = 0; o < f.num_observations(); ++o) f.set_next(static_cast<NodeId>(n), o, next[o]);
    }
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DimensionError(std::string("malformed FSC JSON: ") + e.what());
  }
}

nlohmann::json policy_to_json(const JointPolicy& policy, const ExplicitDecPomdp* model) {
  nlohmann::json j;
  j["format"] = "mcjesp-policy";
  j["version"] = 1;
  auto arr = nlohmann::json::array();
  for (const auto& f : policy.fscs) arr.push_back(fsc_to_json(f, model));
  j["controllers"] = std::move(arr);
  return j;
}

JointPolicy policy_from_json(const nlohmann::json& j) {
  JointPolicy p;
  if (!j.contains("controllers")) throw DimensionError("policy JSON has no 'controllers'");
  for (const auto& c : j.at("controllers")) p.fscs.push_back(fsc_from_json(c));
  return p;
}

}  // namespace mcjesp
