#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcjesp/dpomdp_parser.hpp"
#include "mcjesp/evaluation.hpp"
#include "mcjesp/fsc.hpp"
#include "mcjesp/local_search.hpp"
#include "mcjesp/parallel.hpp"

namespace py = pybind11;
using namespace mcjesp;
using nlohmann::json;

namespace {

JointPolicy policy_of(const std::string& text, const ExplicitDecPomdp& model) {
  auto policy = policy_from_json(json::parse(text));
  check_compatible(policy, model);
  return policy;
}

std::string solve(const ExplicitDecPomdp& model, int max_fsc, int restarts, std::uint64_t seed,
                  const std::string& init, const std::string& eval_mode, double pomcp_timeout_ms,
                  long pomcp_budget_sims, double pomcp_exploration, int pomcp_particles, double epsilon,
                  int min_particles, double process_timeout_ms, long process_max_samples, long eval_sims,
                  double eval_cutoff, double kappa, int max_iterations, int workers) {
  SearchParams p;
  p.build.max_nodes = max_fsc;
  p.build.epsilon = epsilon;
  p.build.min_particles = min_particles;
  p.build.process_timeout_ms = process_timeout_ms;
  p.build.process_max_samples = process_max_samples;
  p.pomcp.timeout_ms = pomcp_timeout_ms;
  p.pomcp.max_simulations = pomcp_budget_sims;
  p.pomcp.exploration = pomcp_exploration;
  p.pomcp.num_particles = pomcp_particles;
  p.pomcp.max_depth = rollout_horizon(model.discount(), eval_cutoff);
  p.init = parse_init_mode(init);
  p.eval_mode = parse_eval_mode(eval_mode);
  p.eval_sims = eval_sims;
  p.eval_cutoff = eval_cutoff;
  p.kappa = kappa;
  p.max_iterations = max_iterations;
  p.workers = workers > 0 ? workers : default_workers();
  RestartSummary s;
  {
    py::gil_scoped_release release;
    s = run_restarts(model, &model, p, restarts, Rng(seed));
  }
  json out = {{"config", to_json(p)},    {"best_restart", s.best}, {"best", s.best_value},
              {"mean", s.mean_value},    {"p25", s.p25},           {"median", s.median},
              {"p75", s.p75},            {"seconds", s.seconds}};
  out["restarts"] = json::array();
  for (const auto& r : s.runs) out["restarts"].push_back(to_json(r));
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_mcjesp, m) {
  m.doc() = "Dec-POMDP controller search";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<ExplicitDecPomdp>(m, "Model")
      .def_static("load", [](const std::string& path) { return load_dpomdp(path); }, py::arg("path"))
      .def_static("parse", [](const std::string& text) { return parse_dpomdp(text); }, py::arg("text"))
      .def_property_readonly("num_agents", &ExplicitDecPomdp::num_agents)
      .def_property_readonly("num_states", &ExplicitDecPomdp::num_states)
      .def_property_readonly("discount", &ExplicitDecPomdp::discount)
      .def_property_readonly("action_sizes", [](const ExplicitDecPomdp& x) { return x.action_space().sizes(); })
      .def_property_readonly("observation_sizes",
                             [](const ExplicitDecPomdp& x) { return x.observation_space().sizes(); })
      .def("to_json", [](const ExplicitDecPomdp& x) { return model_to_json(x).dump(); })
      .def("to_dpomdp", [](const ExplicitDecPomdp& x) {
        std::ostringstream out;
        write_dpomdp(x, out);
        return out.str();
      });

  m.def(
      "evaluate_exact",
      [](const ExplicitDecPomdp& model, const std::string& policy, double tol) {
        const auto pol = policy_of(policy, model);
        py::gil_scoped_release release;
        return evaluate_exact(pol, model, tol);
      },
      py::arg("model"), py::arg("policy"), py::arg("tol") = 1e-6);

  m.def(
      "evaluate_mc",
      [](const ExplicitDecPomdp& model, const std::string& policy, long sims, double cutoff, std::uint64_t seed,
         int workers) {
        const auto pol = policy_of(policy, model);
        McEvaluation e;
        {
          py::gil_scoped_release release;
          Rng rng(seed);
          e = evaluate_mc(pol, model, sims, cutoff, rng, workers > 0 ? workers : default_workers());
        }
        return to_json(e).dump();
      },
      py::arg("model"), py::arg("policy"), py::arg("sims") = 100000, py::arg("cutoff") = 1e-4,
      py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "fsc_to_dot",
      [](const ExplicitDecPomdp& model, const std::string& policy, int agent) {
        const auto pol = policy_of(policy, model);
        return fsc_to_dot(pol.fscs.at(static_cast<std::size_t>(agent)), &model);
      },
      py::arg("model"), py::arg("policy"), py::arg("agent"));

  m.def("solve", &solve, py::arg("model"), py::arg("max_fsc") = 30, py::arg("restarts") = 1, py::arg("seed") = 1,
        py::arg("init") = "heuristic", py::arg("eval_mode") = "mc", py::arg("pomcp_timeout_ms") = 1000.0,
        py::arg("pomcp_budget_sims") = 0, py::arg("pomcp_exploration") = 0.0, py::arg("pomcp_particles") = 1000,
        py::arg("epsilon") = 0.1, py::arg("min_particles") = 1000, py::arg("process_timeout_ms") = 2000.0,
        py::arg("process_max_samples") = 100000, py::arg("eval_sims") = 1000000, py::arg("eval_cutoff") = 1e-4,
        py::arg("kappa") = 0.0, py::arg("max_iterations") = 100, py::arg("workers") = 0);
}
