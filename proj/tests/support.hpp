#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "mcjesp/dpomdp_parser.hpp"
#include "mcjesp/fsc.hpp"
#include "mcjesp/model.hpp"
#include "mcjesp/rng.hpp"

namespace testing {

inline std::filesystem::path benchmark(const std::string& name) {
  return std::filesystem::path(MCJESP_BENCHMARK_DIR) / (name + ".dpomdp");
}

inline const mcjesp::ExplicitDecPomdp& dectiger() {
  static const auto m = mcjesp::load_dpomdp(benchmark("dectiger"));
  return m;
}

/// Classic single-agent tiger: listen is 85% accurate, opening resets.
inline constexpr const char* kTigerPomdp = R"(
agents: 1
discount: 0.95
values: reward
states: tiger-left tiger-right
start: uniform
actions:
listen open-left open-right
observations:
hear-left hear-right
T: listen : identity
T: open-left : uniform
T: open-right : uniform
O: listen : tiger-left : hear-left : 0.85
O: listen : tiger-left : hear-right : 0.15
O: listen : tiger-right : hear-left : 0.15
O: listen : tiger-right : hear-right : 0.85
O: open-left : uniform
O: open-right : uniform
R: listen : * : * : * : -1
R: open-left : tiger-left : * : * : -100
R: open-left : tiger-right : * : * : 10
R: open-right : tiger-left : * : * : 10
R: open-right : tiger-right : * : * : -100
)";

/// One agent, three states; action `good` pays 1 everywhere, the others 0.
inline constexpr const char* kDominantAction = R"(
agents: 1
discount: 0.9
states: 3
start: 0.2 0.3 0.5
actions:
good bad worse
observations:
o0 o1
T: * : uniform
O: * : * : o0 : 0.6
O: * : * : o1 : 0.4
R: good : * : * : * : 1
)";

/// Dense oracle: solves (I - g P) v = r by Gaussian elimination with
/// partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t k = r + 1; k < n; ++k) acc -= a[r][k] * x[k];
    x[r] = acc / a[r][r];
  }
  return x;
}

/// Value of a joint policy from b0 by a dense linear solve over every
/// (state, node tuple), read straight off the probability tables.
inline double dense_policy_value(const mcjesp::JointPolicy& pol, const mcjesp::ExplicitDecPomdp& m) {
  const int n = m.num_agents();
  const int ns = m.num_states();
  std::vector<int> radix(n, 1);
  int nodes = 1;
  for (int i = n - 1; i >= 0; --i) {
    radix[i] = nodes;
    nodes *= pol.fscs[i].size();
  }
  const int dim = ns * nodes;
  std::vector<std::vector<double>> a(dim, std::vector<double>(dim, 0.0));
  std::vector<double> r(dim, 0.0);
  const auto& A = m.action_space();
  const auto& O = m.observation_space();
  for (int s = 0; s < ns; ++s) {
    for (int q = 0; q < nodes; ++q) {
      const int row = s * nodes + q;
      std::vector<int> node(n), act(n);
      for (int i = 0; i < n; ++i) {
        node[i] = (q / radix[i]) % pol.fscs[i].size();
        act[i] = pol.fscs[i].action(node[i]);
      }
      const int ja = A.encode(act);
      a[row][row] += 1.0;
      r[row] = m.reward(s, ja);
      for (int s2 = 0; s2 < ns; ++s2) {
        const double t = m.transition(s, ja, s2);
        if (t == 0.0) continue;
        for (int o = 0; o < O.total(); ++o) {
          const double po = m.observation(ja, s2, o);
          if (po == 0.0) continue;
          int q2 = 0;
          for (int i = 0; i < n; ++i) q2 += pol.fscs[i].next(node[i], O.component(o, i)) * radix[i];
          a[row][s2 * nodes + q2] -= m.discount() * t * po;
        }
      }
    }
  }
  const auto v = solve_linear(a, r);
  double value = 0.0;
  for (int s = 0; s < ns; ++s) value += m.initial_belief()[s] * v[s * nodes];
  return value;
}

/// Random controller with `size` nodes.
inline mcjesp::Fsc random_fsc(int agent, int na, int no, int size, mcjesp::Rng& rng) {
  mcjesp::Fsc f(agent, na, no);
  for (int k = 0; k < size; ++k) f.add_node(static_cast<int>(rng.below(na)));
  for (int k = 0; k < size; ++k)
    for (int o = 0; o < no; ++o) f.set_next(k, o, static_cast<int>(rng.below(size)));
  return f;
}

inline mcjesp::JointPolicy random_policy(const mcjesp::DecPomdpSimulator& m, int size, mcjesp::Rng& rng) {
  mcjesp::JointPolicy p;
  for (int i = 0; i < m.num_agents(); ++i)
    p.fscs.push_back(random_fsc(i, m.action_space().size(i), m.observation_space().size(i), size, rng));
  return p;
}

}  // namespace testing
