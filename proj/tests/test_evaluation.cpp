#include <doctest.h>

#include <cmath>

#include "mcjesp/evaluation.hpp"
#include "support.hpp"

using namespace mcjesp;

TEST_CASE("rollout horizon") {
  CHECK(rollout_horizon(0.9, 1e-4) == 88);
  CHECK(std::pow(0.9, 87) >= 1e-4);
  CHECK(std::pow(0.9, 88) < 1e-4);
  CHECK(rollout_horizon(0.0, 1e-4) == 1);
  CHECK_THROWS(rollout_horizon(0.9, 0.0));
  CHECK_THROWS(rollout_horizon(0.9, 1.0));
}

TEST_CASE("exact evaluation matches a dense linear solve") {
  Rng rng(11);
  for (const auto* name : {"dectiger", "recycling", "grid3x3"}) {
    const auto m = load_dpomdp(testing::benchmark(name));
    for (int size : {1, 2, 4}) {
      const auto p = testing::random_policy(m, size, rng);
      CHECK(evaluate_exact(p, m, 1e-9) == doctest::Approx(testing::dense_policy_value(p, m)).epsilon(1e-7));
    }
  }
}

TEST_CASE("always-listen on dectiger") {
  const auto& m = testing::dectiger();
  JointPolicy p{{Fsc::constant(0, 3, 2, 0), Fsc::constant(1, 3, 2, 0)}};
  // -2 forever
  CHECK(evaluate_exact(p, m, 1e-10) == doctest::Approx(-20.0).epsilon(1e-8));
}

TEST_CASE("zero-reward model evaluates to 0") {
  const auto m = parse_dpomdp(R"(
agents: 2
discount: 0.95
states: 2
actions:
2
2
observations:
1
1
T: * : uniform
O: * : * : * : 1
)");
  JointPolicy p{{Fsc::constant(0, 2, 1, 0), Fsc::constant(1, 2, 1, 1)}};
  CHECK(evaluate_exact(p, m) == 0.0);
  Rng rng(1);
  CHECK(evaluate_mc(p, m, 100, 1e-4, rng).mean == 0.0);
}

TEST_CASE("monte carlo value agrees with exact") {
  Rng rng(5);
  const auto& m = testing::dectiger();
  for (int trial = 0; trial < 3; ++trial) {
    const auto p = testing::random_policy(m, 3, rng);
    const double exact = evaluate_exact(p, m, 1e-9);
    const auto mc = evaluate_mc(p, m, 40000, 1e-4, rng);
    CHECK(mc.t_cut == 88);
    CHECK(mc.num_sims == 40000);
    // truncation bias is at most 1e-4 * max|r| / (1 - g)
    CHECK(std::abs(mc.mean - exact) < 5.0 * mc.std_error + 0.1);
  }
}

TEST_CASE("monte carlo result does not depend on the worker count") {
  Rng seed(9);
  const auto& m = testing::dectiger();
  const auto p = testing::random_policy(m, 3, seed);
  Rng a(42), b(42);
  const auto one = evaluate_mc(p, m, 5000, 1e-4, a, 1);
  const auto four = evaluate_mc(p, m, 5000, 1e-4, b, 4);
  CHECK(one.mean == four.mean);
  CHECK(one.std_error == four.std_error);
  CHECK(a == b);
}
