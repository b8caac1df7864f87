// Acceptance checks: one PASS/FAIL line per criterion.
//
// MCJESP_ACCEPTANCE=1,5,6 runs a subset (default: all).  Criteria 1-4 and 11
// solve full benchmarks and take tens of minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mcjesp/best_response.hpp"
#include "mcjesp/dpomdp_parser.hpp"
#include "mcjesp/evaluation.hpp"
#include "mcjesp/heuristic_init.hpp"
#include "mcjesp/local_search.hpp"
#include "mcjesp/parallel.hpp"

namespace fs = std::filesystem;
using namespace mcjesp;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

fs::path benchmark(const std::string& name) { return fs::path(MCJESP_BENCHMARK_DIR) / (name + ".dpomdp"); }

/// Settings used for the benchmark runs: exact evaluation on the explicit
/// model, everything else at its default.
SearchParams benchmark_params(const ExplicitDecPomdp& m, int cap, double pomcp_ms) {
  SearchParams p;
  p.build.max_nodes = cap;
  p.pomcp.timeout_ms = pomcp_ms;
  p.pomcp.max_depth = rollout_horizon(m.discount(), p.eval_cutoff);
  p.eval_mode = EvalMode::exact;
  p.workers = default_workers();
  return p;
}

std::string values(const RestartSummary& s) {
  std::string out;
  for (const auto& r : s.runs) out += fmt::format("{}{:.3f}", out.empty() ? "" : " ", r.score());
  return out;
}

Verdict benchmark_values(const std::string& name, int cap, int restarts, double pomcp_ms, double best_min,
                         double mean_min) {
  const auto m = load_dpomdp(benchmark(name));
  const auto s = run_restarts(m, &m, benchmark_params(m, cap, pomcp_ms), restarts, Rng(2024));
  bool pass = s.best_value >= best_min && s.mean_value >= mean_min;
  return {pass, fmt::format("best {:.3f} (need >= {}), mean {:.3f}{}, restarts [{}], {:.0f} s", s.best_value,
                            best_min, s.mean_value,
                            std::isinf(mean_min) ? "" : fmt::format(" (need >= {})", mean_min), values(s),
                            s.seconds)};
}

Verdict criterion1() { return benchmark_values("recycling", 30, 5, 200, 30.0, 28.0); }
Verdict criterion2() { return benchmark_values("grid3x3", 50, 5, 500, 5.3, -INFINITY); }
Verdict criterion3() { return benchmark_values("dectiger", 30, 10, 1000, -5.0, -INFINITY); }

Verdict criterion4() {
  std::string detail;
  bool pass = true;
  for (const auto& [name, floor] : std::vector<std::pair<std::string, double>>{{"boxpushing", 100.0},
                                                                              {"marsrover", 15.0}}) {
    const auto m = load_dpomdp(benchmark(name));
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string what;
    try {
      const auto s = run_restarts(m, &m, benchmark_params(m, 50, 1000), 1, Rng(2024));
      const auto& pol = s.runs[0].result.policy;
      for (const auto& f : pol.fscs) {
        f.validate();
        ok = ok && f.size() <= 50;
      }
      check_compatible(pol, m);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      ok = ok && s.best_value >= floor && secs <= 1800.0;
      what = fmt::format("{} {:.3f} (need >= {}), sizes {}, {:.0f} s", name, s.best_value, floor,
                         fmt::join(pol.sizes(), "/"), secs);
    } catch (const std::exception& e) {
      ok = false;
      what = fmt::format("{} threw: {}", name, e.what());
    }
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what;
  }
  return {pass, detail};
}

Verdict criterion5() {
  const auto m = load_dpomdp(benchmark("dectiger"));
  Rng rng(5);
  Fsc other(1, 3, 2);
  for (int k = 0; k < 3; ++k) other.add_node(static_cast<ActionId>(rng.below(3)));
  for (int k = 0; k < 3; ++k)
    for (int o = 0; o < 2; ++o) other.set_next(k, o, static_cast<NodeId>(rng.below(3)));
  const JointPolicy pol{{Fsc::constant(0, 3, 2, 0), other}};
  const BestResponseModel br(m, pol, 0);
  const auto ext = exact_extended(m, pol, 0);
  const int draws = 100000;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int e = static_cast<int>(rng.below(ext.states.size()));
    const auto a = static_cast<ActionId>(rng.below(3));
    std::map<int, long> counts;
    for (int k = 0; k < draws; ++k) ++counts[ext.find(br.step(ext.states[e], a, rng).next)];
    double tv = 0.0;
    std::set<int> seen;
    for (const auto& [k, p] : ext.row(e, a)) {
      tv += std::abs(static_cast<double>(counts[k]) / draws - p);
      seen.insert(k);
    }
    for (const auto& [k, c] : counts)
      if (!seen.count(k)) tv += static_cast<double>(c) / draws;
    worst = std::max(worst, 0.5 * tv);
  }
  return {worst <= 0.01, fmt::format("max total variation {:.5f} over 20 (e, a_i) pairs (need <= 0.01)", worst)};
}

Verdict criterion6() {
  const auto m = load_dpomdp(benchmark("dectiger"));
  Rng rng(6);
  BuildParams bp;
  bp.min_particles = 10000;
  bp.process_timeout_ms = 0;
  double worst = 0.0;
  int cases = 0;
  while (cases < 10) {
    const double p_left = 0.05 + 0.9 * rng.uniform();
    ParticleBelief<StateId> particles;
    for (int k = 0; k < 10000; ++k) particles.add(rng.uniform() < p_left ? 0 : 1);
    const auto empirical = particles.histogram();
    const std::vector<double> b{empirical.probability(0), empirical.probability(1)};
    const auto a = static_cast<JointIndex>(rng.below(m.action_space().total()));
    const int agent = static_cast<int>(rng.below(2));
    const auto r = heuristic_process_action(particles, m, a, agent, bp, rng);
    for (ObsId o = 0; o < 2 && cases < 10; ++o) {
      if (!r.observed(o)) continue;
      const auto exact = one_sided_update_exact(m, b, a, o, agent);
      const auto h = r.buckets[o].histogram();
      for (StateId s = 0; s < 2; ++s) worst = std::max(worst, std::abs(h.probability(s) - exact[s]));
      ++cases;
    }
  }
  return {worst <= 0.02, fmt::format("max L-inf error {:.5f} over 10 cases (need <= 0.02)", worst)};
}

SearchParams light_params(const ExplicitDecPomdp& m) {
  SearchParams p;
  p.build.max_nodes = 30;
  p.build.min_particles = 300;
  p.build.process_timeout_ms = 0;
  p.pomcp.timeout_ms = 0;
  p.pomcp.max_simulations = 500;
  p.pomcp.num_particles = 300;
  p.pomcp.max_depth = rollout_horizon(m.discount(), p.eval_cutoff);
  p.eval_mode = EvalMode::mc;
  p.eval_sims = 20000;
  p.workers = default_workers();
  p.keep_traces = true;
  return p;
}

Verdict criterion7() {
  const auto m = load_dpomdp(benchmark("recycling"));
  const auto p = light_params(m);
  int monotone = 0, clean = 0, cap_hits = 0;
  const int runs = 50;
  for (int seed = 0; seed < runs; ++seed) {
    Rng rng(1000 + seed);
    Rng init_rng = rng.split(0);
    Rng search_rng = rng.split(1);
    const auto res = local_search(m, nullptr, initial_policy(m, p, init_rng), p, search_rng);
    bool mono = true;
    double prev = res.initial_value;
    for (const auto& it : res.log) {
      mono = mono && it.best_value >= prev;
      prev = it.best_value;
    }
    monotone += mono;
    const bool stopped = res.final_no_improvement == m.num_agents();
    const bool capped = static_cast<int>(res.log.size()) == p.max_iterations;
    clean += stopped || capped;
    cap_hits += res.hit_iteration_cap;
  }
  return {monotone == runs && clean == runs,
          fmt::format("{}/{} runs non-decreasing, {}/{} halted at nNI = |I| or the cap, {} cap hits", monotone,
                      runs, clean, runs, cap_hits)};
}

Verdict criterion8() {
  long nodes = 0;
  double worst = 0.0;
  for (const auto* name : {"dectiger", "recycling", "grid3x3"}) {
    const auto m = load_dpomdp(benchmark(name));
    auto p = light_params(m);
    p.eval_mode = EvalMode::exact;
    const auto s = run_restarts(m, &m, p, 2, Rng(8));
    for (const auto& r : s.runs) {
      std::vector<const BuildTrace*> all;
      for (const auto& t : r.result.init_traces) all.push_back(&t);
      for (const auto& t : r.result.traces) all.push_back(&t);
      for (const auto* t : all)
        for (const auto& n : t->expansions) {
          double sum = 0.0;
          for (const auto& c : n.children) sum += c.weight;
          worst = std::max(worst, std::abs(sum - n.weight));
          ++nodes;
        }
    }
  }
  return {nodes > 0 && worst <= 1e-9,
          fmt::format("{} expanded nodes, max |sum of child weights - parent weight| = {:.3g} (need <= 1e-9)", nodes,
                      worst)};
}

Verdict criterion9() {
  const auto m = parse_dpomdp(R"(
agents: 1
discount: 0.9
states: 3
start: uniform
actions:
good bad worse
observations:
o0 o1
T: * : uniform
O: * : * : o0 : 0.6
O: * : * : o1 : 0.4
R: good : * : * : * : 1
)");
  auto p = benchmark_params(m, 30, 0);
  p.pomcp.max_simulations = 2000;
  p.build.process_timeout_ms = 0;
  const auto s = run_restarts(m, &m, p, 1, Rng(9));
  const double target = 1.0 / (1.0 - m.discount());
  const double v = *s.runs[0].exact_value;
  return {std::abs(v - target) <= 1e-3,
          fmt::format("exact value {:.6f}, analytic {:.6f}, |diff| {:.2g} (need <= 1e-3)", v, target,
                      std::abs(v - target))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion10() {
  const fs::path work = fs::temp_directory_path() / "mcjesp_acceptance_replay";
  fs::remove_all(work);
  std::vector<std::string> outputs;
  for (const int workers : {1, 3}) {
    const fs::path dir = work / fmt::format("w{}", workers);
    const std::string cmd = fmt::format(
        "\"{}\" solve --model \"{}\" --max-fsc 10 --restarts 3 --seed 77 --pomcp-budget-sims 400 "
        "--min-particles 300 --eval-sims 20000 --workers {} --run-dir \"{}\" --quiet > /dev/null",
        MCJESP_CLI, benchmark("dectiger").string(), workers, dir.string());
    if (std::system(cmd.c_str()) != 0) return {false, "solve command failed: " + cmd};
    outputs.push_back(slurp(dir / "results.json"));
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, fmt::format("results.json with 1 and 3 workers: {} ({} bytes)", same ? "identical" : "different",
                            outputs[0].size())};
}

Verdict criterion11() {
  const auto m = load_dpomdp(benchmark("boxpushing"));
  std::map<int, std::vector<double>> first;
  for (const int cap : {10, 50}) {
    auto p = benchmark_params(m, cap, 500);
    p.max_iterations = 1;
    for (int seed = 0; seed < 5; ++seed) {
      Rng rng(1100 + seed);
      Rng init_rng = rng.split(0);
      Rng search_rng = rng.split(1);
      const auto res = local_search(m, &m, initial_policy(m, p, init_rng), p, search_rng);
      first[cap].push_back(res.log.at(0).value);
    }
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double m10 = mean(first[10]);
  const double m50 = mean(first[50]);
  return {m10 < m50, fmt::format("mean first-iteration value: cap 10 {:.3f} [{:.2f}], cap 50 {:.3f} [{:.2f}]", m10,
                                 fmt::join(first[10], " "), m50, fmt::join(first[50], " "))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"Recycling value", criterion1},
      {"Grid3x3 value", criterion2},
      {"DecTiger floor", criterion3},
      {"Box-Pushing / Mars Rover pipeline", criterion4},
      {"generative vs exact best-response dynamics", criterion5},
      {"one-sided update oracle", criterion6},
      {"monotonicity and termination", criterion7},
      {"weight conservation", criterion8},
      {"single-agent reduction", criterion9},
      {"determinism", criterion10},
      {"FSC-size ablation direction", criterion11},
  };
  std::set<int> selected;
  if (const char* env = std::getenv("MCJESP_ACCEPTANCE"); env && *env) {
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) selected.insert(std::stoi(item));
  }
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, fmt::format("threw: {}", e.what())};
    }
    failed += !out.pass;
    fmt::print("[{}] criterion {:2}: {}: {}\n", out.pass ? "PASS" : "FAIL", id, criteria[k].first, out.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
