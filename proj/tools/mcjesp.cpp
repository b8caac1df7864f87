// mcjesp: solve, evaluate and export Dec-POMDP controllers.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "mcjesp/dpomdp_parser.hpp"
#include "mcjesp/evaluation.hpp"
#include "mcjesp/fsc.hpp"
#include "mcjesp/local_search.hpp"
#include "mcjesp/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mcjesp;

namespace {

constexpr int kResultsVersion = 1;
constexpr int kSummaryVersion = 1;

std::string env_name(const std::string& flag) {
  std::string s = "MCJESP_";
  for (char c : flag) s += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(name))->capture_default_str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error(fmt::format("cannot write {}", p.string()));
  out << text;
}

std::string domain_name(const std::string& model_path) { return fs::path(model_path).stem().string(); }

struct SolveOptions {
  std::string model;
  std::vector<int> max_fsc{30};
  int restarts = 1;
  std::uint64_t seed = 1;
  std::string init = "heuristic";
  std::string eval_mode = "mc";
  double pomcp_timeout_ms = 1000.0;
  long pomcp_budget_sims = 0;
  double pomcp_exploration = 0.0;
  int pomcp_particles = 1000;
  double epsilon = 0.1;
  long eval_sims = 1000000;
  double eval_cutoff = 1e-4;
  int min_particles = 1000;
  double process_timeout_ms = 2000.0;
  long process_max_samples = 100000;
  double kappa = 0.0;
  int max_iterations = 100;
  int workers = 0;
  std::string out = "runs";
  std::string run_dir;
  bool traces = false;
  bool quiet = false;
};

int run_solve(const SolveOptions& o, bool timeout_given) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = load_dpomdp(o.model);

  SearchParams p;
  p.init = parse_init_mode(o.init);
  p.eval_mode = parse_eval_mode(o.eval_mode);
  p.pomcp.timeout_ms = o.pomcp_timeout_ms;
  p.pomcp.max_simulations = o.pomcp_budget_sims;
  // A simulation budget on its own replaces the clock so reruns replay.
  if (o.pomcp_budget_sims > 0 && !timeout_given) p.pomcp.timeout_ms = 0.0;
  p.pomcp.exploration = o.pomcp_exploration;
  p.pomcp.num_particles = o.pomcp_particles;
  p.pomcp.max_depth = rollout_horizon(model.discount(), o.eval_cutoff);
  p.build.epsilon = o.epsilon;
  p.build.min_particles = o.min_particles;
  p.build.process_timeout_ms = o.process_timeout_ms;
  p.build.process_max_samples = o.process_max_samples;
  p.eval_sims = o.eval_sims;
  p.eval_cutoff = o.eval_cutoff;
  p.kappa = o.kappa;
  p.max_iterations = o.max_iterations;
  p.workers = o.workers > 0 ? o.workers : default_workers();
  p.keep_traces = o.traces;
  if (o.restarts < 1) throw Error("--restarts must be >= 1");
  if (o.max_fsc.empty()) throw Error("--max-fsc needs at least one value");

  const std::string domain = domain_name(o.model);
  fs::path dir = o.run_dir;
  if (dir.empty()) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    dir = fs::path(o.out) / fmt::format("{}_{:%Y%m%d-%H%M%S}", domain, fmt::localtime(now));
  }
  fs::create_directories(dir);

  json base_config = to_json(p);
  base_config.erase("max_fsc");
  base_config["model"] = fs::path(o.model).filename().string();
  base_config["domain"] = domain;
  base_config["seed"] = o.seed;
  base_config["restarts"] = o.restarts;
  base_config["max_fsc"] = o.max_fsc;
  json config_file = base_config;
  config_file["workers"] = p.workers;
  config_file["model_path"] = fs::absolute(o.model).string();
  write_file(dir / "config.json", config_file.dump(2) + "\n");

  json results = {{"format", "mcjesp-results"}, {"version", kResultsVersion}, {"config", base_config}};
  results["sweeps"] = json::array();
  std::string csv = "schema_version,domain,max_fsc,restarts,best,mean,p25,median,p75,time_s,seed\n";

  for (const int cap : o.max_fsc) {
    SearchParams pc = p;
    pc.build.max_nodes = cap;
    const fs::path sub = dir / fmt::format("fsc{}", cap);
    fs::create_directories(sub);
    const Rng master(o.seed);
    const auto summary = run_restarts(model, &model, pc, o.restarts, master, [&](const RestartRecord& r) {
      std::ofstream log(sub / fmt::format("iterations_r{}.jsonl", r.restart));
      for (const auto& it : r.result.log) log << to_json(it).dump() << '\n';
      if (o.traces) {
        std::ofstream tr(sub / fmt::format("traces_r{}.jsonl", r.restart));
        const auto dump = [&](const BuildTrace& t, const std::string& phase, int iteration) {
          for (const auto& e : t.expansions) {
            json j = to_json(e);
            j["phase"] = phase;
            j["iteration"] = iteration;
            j["agent"] = t.agent;
            tr << j.dump() << '\n';
          }
        };
        for (const auto& t : r.result.init_traces) dump(t, "init", -1);
        for (std::size_t k = 0; k < r.result.traces.size(); ++k) dump(r.result.traces[k], "search", static_cast<int>(k));
      }
      if (!o.quiet)
        fmt::print(std::cerr, "[max_fsc={}] restart {} done: value {:.4f}{} after {} iterations ({:.1f} s)\n", cap,
                   r.restart, r.score(), r.exact_value ? " (exact)" : "", r.result.log.size(), r.result.seconds);
    });

    const auto& best = summary.runs[summary.best];
    write_file(sub / "policy_best.json", policy_to_json(best.result.policy, &model).dump(2) + "\n");
    for (const auto& f : best.result.policy.fscs)
      write_file(sub / fmt::format("policy_best_agent{}.dot", f.agent()), fsc_to_dot(f, &model));

    json sweep = {{"max_fsc", cap},          {"best_restart", summary.best}, {"best", summary.best_value},
                  {"mean", summary.mean_value}, {"p25", summary.p25},        {"median", summary.median},
                  {"p75", summary.p75}};
    sweep["restarts"] = json::array();
    for (const auto& r : summary.runs) sweep["restarts"].push_back(to_json(r));
    results["sweeps"].push_back(std::move(sweep));
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{:.3f},{}\n", kSummaryVersion, domain, cap, o.restarts,
                       summary.best_value, summary.mean_value, summary.p25, summary.median, summary.p75,
                       summary.seconds, o.seed);
  }
  write_file(dir / "results.json", results.dump(2) + "\n");
  write_file(dir / "summary.csv", csv);
  if (!o.quiet)
    fmt::print(std::cerr, "total {:.1f} s\n",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  fmt::print("{}\n", dir.string());
  return 0;
}

JointPolicy read_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read {}", path));
  return policy_from_json(json::parse(in));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo best-response search for Dec-POMDP finite-state controllers"};
  app.require_subcommand(1);

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "Run restarts of the local search and write a run directory");
  flag(solve, "model", so.model, ".dpomdp file")->required()->check(CLI::ExistingFile);
  flag(solve, "max-fsc", so.max_fsc, "Controller size cap; several values run a sweep")->delimiter(',');
  flag(solve, "restarts", so.restarts, "Independent restarts per cap");
  flag(solve, "seed", so.seed, "Master seed");
  flag(solve, "init", so.init, "Initial policy")->check(CLI::IsMember({"heuristic", "trivial"}));
  flag(solve, "eval-mode", so.eval_mode, "Candidate evaluation")->check(CLI::IsMember({"mc", "exact"}));
  auto* timeout_opt = flag(solve, "pomcp-timeout-ms", so.pomcp_timeout_ms, "POMCP wall-clock budget per node");
  flag(solve, "pomcp-budget-sims", so.pomcp_budget_sims,
       "POMCP simulations per node; alone, it replaces the clock (deterministic runs)");
  flag(solve, "pomcp-exploration", so.pomcp_exploration, "UCB1 constant; 0 = discounted return span from a random-walk probe");
  flag(solve, "pomcp-particles", so.pomcp_particles, "Particles in the initial belief");
  flag(solve, "epsilon", so.epsilon, "Belief merge distance (L1)");
  flag(solve, "eval-sims", so.eval_sims, "Monte-Carlo evaluation rollouts");
  flag(solve, "eval-cutoff", so.eval_cutoff, "Rollouts stop once discount^t < cutoff");
  flag(solve, "min-particles", so.min_particles, "Particles required per observed child belief");
  flag(solve, "process-timeout-ms", so.process_timeout_ms, "Sampling time limit per expanded node");
  flag(solve, "process-max-samples", so.process_max_samples, "Sampling cap per expanded node");
  flag(solve, "kappa", so.kappa, "Accept only if v > v_best + kappa * stderr");
  flag(solve, "max-iterations", so.max_iterations, "Iteration cap per local search");
  flag(solve, "workers", so.workers, "Worker threads; 0 = logical cores");
  flag(solve, "out", so.out, "Parent of the timestamped run directory");
  flag(solve, "run-dir", so.run_dir, "Exact run directory (overrides --out)");
  solve->add_flag("--traces", so.traces, "Write controller build traces")->envname("MCJESP_TRACES");
  solve->add_flag("--quiet", so.quiet, "No progress on stderr")->envname("MCJESP_QUIET");

  std::string eval_model, eval_policy, eval_mode = "both";
  long eval_sims = 1000000;
  double eval_cutoff = 1e-4;
  std::uint64_t eval_seed = 1;
  int eval_workers = 0;
  auto* eval = app.add_subcommand("eval", "Value of a saved joint policy");
  flag(eval, "model", eval_model, ".dpomdp file")->required()->check(CLI::ExistingFile);
  flag(eval, "policy", eval_policy, "Policy JSON")->required()->check(CLI::ExistingFile);
  flag(eval, "eval-mode", eval_mode, "Which values to report")->check(CLI::IsMember({"mc", "exact", "both"}));
  flag(eval, "eval-sims", eval_sims, "Monte-Carlo rollouts");
  flag(eval, "eval-cutoff", eval_cutoff, "Rollouts stop once discount^t < cutoff");
  flag(eval, "seed", eval_seed, "Seed for Monte-Carlo evaluation");
  flag(eval, "workers", eval_workers, "Worker threads; 0 = logical cores");

  std::string exp_model, exp_policy, exp_format = "dot", exp_out = ".";
  auto* exp = app.add_subcommand("export", "Write per-agent DOT or JSON files for a saved policy");
  flag(exp, "model", exp_model, ".dpomdp file (for names)")->required()->check(CLI::ExistingFile);
  flag(exp, "policy", exp_policy, "Policy JSON")->required()->check(CLI::ExistingFile);
  flag(exp, "format", exp_format, "Output format")->check(CLI::IsMember({"dot", "json"}));
  flag(exp, "out", exp_out, "Output directory");

  std::string dump_model, dump_format = "json";
  auto* dump = app.add_subcommand("dump-model", "Print a parsed model");
  flag(dump, "model", dump_model, ".dpomdp file")->required()->check(CLI::ExistingFile);
  flag(dump, "format", dump_format, "Output format")->check(CLI::IsMember({"json", "dpomdp"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return run_solve(so, timeout_opt->count() > 0 || std::getenv("MCJESP_POMCP_TIMEOUT_MS"));
    if (*eval) {
      const auto model = load_dpomdp(eval_model);
      const auto policy = read_policy(eval_policy);
      json out = {{"model", fs::path(eval_model).filename().string()}, {"fsc_sizes", policy.sizes()}};
      if (eval_mode != "mc") out["exact"] = evaluate_exact(policy, model);
      if (eval_mode != "exact") {
        Rng rng(eval_seed);
        out["mc"] = to_json(evaluate_mc(policy, model, eval_sims, eval_cutoff, rng,
                                        eval_workers > 0 ? eval_workers : default_workers()));
      }
      fmt::print("{}\n", out.dump(2));
      return 0;
    }
    if (*exp) {
      const auto model = load_dpomdp(exp_model);
      const auto policy = read_policy(exp_policy);
      check_compatible(policy, model);
      fs::create_directories(exp_out);
      for (const auto& f : policy.fscs) {
        const fs::path p = fs::path(exp_out) / fmt::format("agent{}.{}", f.agent(), exp_format);
        write_file(p, exp_format == "dot" ? fsc_to_dot(f, &model) : fsc_to_json(f, &model).dump(2) + "\n");
        fmt::print("{}\n", p.string());
      }
      return 0;
    }
    if (*dump) {
      const auto model = load_dpomdp(dump_model);
      if (dump_format == "json")
        fmt::print("{}\n", model_to_json(model).dump(2));
      else
        write_dpomdp(model, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
