#include <doctest.h>

#include <map>
#include <sstream>

#include "mcjesp/dpomdp_parser.hpp"
#include "mcjesp/model.hpp"
#include "support.hpp"

using namespace mcjesp;

namespace {

constexpr const char* kMinimal = R"(
agents: 2
discount: 0.5
states: 1
start: 1
actions:
1
1
observations:
1
1
T: * : * : * : 1
O: * : * : * : 1
R: * : * : * : * : 0
)";

int error_line(const std::string& text) {
  try {
    parse_dpomdp(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("minimal model parses") {
  const auto m = parse_dpomdp(kMinimal);
  CHECK(m.num_agents() == 2);
  CHECK(m.num_states() == 1);
  CHECK(m.action_space().total() == 1);
  CHECK(m.observation_space().total() == 1);
  CHECK(m.discount() == 0.5);
  CHECK(m.reward(0, 0) == 0.0);
  Rng rng(1);
  const auto tr = m.step(0, 0, rng);
  CHECK(tr.next == 0);
  CHECK(tr.obs == 0);
}

TEST_CASE("benchmark sizes") {
  const auto& dt = testing::dectiger();
  CHECK(dt.num_states() == 2);
  CHECK(dt.action_space().sizes() == std::vector<int>{3, 3});
  CHECK(dt.observation_space().sizes() == std::vector<int>{2, 2});
  CHECK(dt.discount() == doctest::Approx(0.9));
  const auto mars = load_dpomdp(testing::benchmark("marsrover"));
  CHECK(mars.num_states() == 256);
  CHECK(mars.action_space().sizes() == std::vector<int>{6, 6});
  CHECK(mars.observation_space().sizes() == std::vector<int>{8, 8});
  const auto box = load_dpomdp(testing::benchmark("boxpushing"));
  CHECK(box.num_states() == 100);
  CHECK(box.action_space().sizes() == std::vector<int>{4, 4});
  CHECK(box.observation_space().sizes() == std::vector<int>{5, 5});
}

TEST_CASE("dectiger tables read back") {
  const auto& m = testing::dectiger();
  const auto& A = m.action_space();
  const auto listen = A.encode(std::vector<int>{0, 0});
  CHECK(m.transition(0, listen, 0) == 1.0);
  CHECK(m.reward(0, listen) == -2.0);
  CHECK(m.reward(0, A.encode(std::vector<int>{2, 2})) == 20.0);
  CHECK(m.reward(1, A.encode(std::vector<int>{1, 1})) == 20.0);
  CHECK(m.observation(listen, 0, m.observation_space().encode(std::vector<int>{0, 0})) ==
        doctest::Approx(0.85 * 0.85));
  CHECK(m.state_name(1) == "tiger-right");
  CHECK(m.action_name(1, 2) == "open-right");
}

TEST_CASE("joint space encodes agent 0 as the most significant digit") {
  const JointSpace js({3, 2, 4});
  CHECK(js.total() == 24);
  CHECK(js.encode(std::vector<int>{1, 0, 2}) == 1 * 8 + 0 * 4 + 2);
  for (JointIndex j = 0; j < js.total(); ++j) CHECK(js.encode(js.decode(j)) == j);
  CHECK(js.component(23, 0) == 2);
  CHECK(js.component(23, 2) == 3);
}

TEST_CASE("wildcards, later entries and cost values") {
  const auto m = parse_dpomdp(R"(
agents: 1
discount: 0.9
values: cost
states: a b
start: b
actions:
x y
observations:
u v
T: * : uniform
T: x : a : b : 0.25
T: x : a : a : 0.75
O: * : * : uniform
R: * : * : * : * : 2
R: y : b : * : * : 5
)");
  CHECK(m.initial_belief() == std::vector<double>{0.0, 1.0});
  CHECK(m.transition(0, 0, 0) == 0.75);
  CHECK(m.transition(1, 0, 0) == 0.5);
  CHECK(m.reward(0, 0) == -2.0);
  CHECK(m.reward(1, 1) == -5.0);
}

TEST_CASE("rewards over next state and observation are reduced to expectations") {
  const auto m = parse_dpomdp(R"(
agents: 1
discount: 0.9
states: a b
actions: 1
observations: u v
T: 0 : a
0.3 0.7
T: 0 : b
0 1
O: 0 : a
1 0
O: 0 : b
0.4 0.6
R: 0 : a : b : v : 10
R: 0 : a : a : * : 1
)");
  // E[r | a, 0] = 0.3 * 1 + 0.7 * 0.6 * 10
  CHECK(m.reward(0, 0) == doctest::Approx(0.3 + 4.2));
  CHECK(m.reward(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("matrix forms") {
  const auto m = parse_dpomdp(R"(
agents: 1
discount: 0.9
states: 2
actions: 2
observations: 2
T: 0
0.1 0.9
0.6 0.4
T: 1
identity
O: *
0.5 0.5
0.2 0.8
R: 1 : 1
3 4
5 6
)");
  CHECK(m.transition(1, 0, 0) == 0.6);
  CHECK(m.transition(0, 1, 0) == 1.0);
  CHECK(m.observation(0, 1, 1) == 0.8);
  CHECK(m.reward(1, 1) == doctest::Approx(0.2 * 5 + 0.8 * 6));
}

TEST_CASE("parse errors carry the line") {
  CHECK(error_line("agents: 1\ndiscount: 0.9\nstates: 2\nactions: 2\nobservations: 2\nT: 5 : * : uniform\n") == 6);
  CHECK(error_line("agents: 1\ndiscount: 0.9\nstates: 2\nactions: 2\nobservations: 2\nO: 0 : 1 : oops : 1\n") == 6);
  CHECK(error_line("agents: 1\ndiscount: 0.9\nstates: 2\nactions: 2\nobservations: 2\nstart: 0.5 0.5 0.1\n") >= 1);
  CHECK(error_line("agents 2\n") >= 1);
  CHECK_THROWS_AS(parse_dpomdp("agents: 1\nstates: 2\nactions: 2\nobservations: 2\n"), Error);
  try {
    parse_dpomdp("agents: 1\ndiscount: 0.9\nstates: 2\nactions: 2\nobservations: 2\nT: 0 : nosuch : uniform\n");
    FAIL("expected a resolution error");
  } catch (const ResolutionError& e) {
    CHECK(e.line() == 6);
    CHECK(e.column() > 1);
  }
}

TEST_CASE("rows that do not sum to one are rejected") {
  const std::string text = "agents: 1\ndiscount: 0.9\nstates: 2\nactions: 1\nobservations: 1\n"
                           "T: 0 : 0\n0.5 0.4\nT: 0 : 1\n0 1\nO: * : * : * : 1\n";
  CHECK_THROWS_AS(parse_dpomdp(text), ValidationError);
}

TEST_CASE("write then parse is the identity on the tables") {
  for (const auto* name : {"dectiger", "recycling", "grid3x3"}) {
    const auto m = load_dpomdp(testing::benchmark(name));
    std::ostringstream out;
    write_dpomdp(m, out);
    const auto back = parse_dpomdp(out.str());
    CHECK(back.tables().transition == m.tables().transition);
    CHECK(back.tables().observation == m.tables().observation);
    CHECK(back.tables().reward == m.tables().reward);
    CHECK(back.tables().initial_belief == m.tables().initial_belief);
    CHECK(back.tables().state_names == m.tables().state_names);
    CHECK(back.discount() == m.discount());
  }
}

TEST_CASE("sampled steps follow the exact one-step distribution") {
  const auto& m = testing::dectiger();
  const auto& A = m.action_space();
  Rng rng(7);
  for (const auto ja : {A.encode(std::vector<int>{0, 0}), A.encode(std::vector<int>{1, 0})}) {
    const auto& exact = m.exact_probs(0, ja);
    double total = 0.0;
    for (const auto& o : exact) total += o.prob;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    std::map<std::pair<int, int>, int> counts;
    const int draws = 200000;
    for (int k = 0; k < draws; ++k) {
      const auto tr = m.step(0, ja, rng);
      ++counts[{tr.next, tr.obs}];
      CHECK_EQ(tr.reward, m.reward(0, ja));
    }
    for (const auto& o : exact) {
      // 5 sigma binomial bound
      const double freq = counts[{o.next, o.obs}] / static_cast<double>(draws);
      CHECK(std::abs(freq - o.prob) < 5.0 * std::sqrt(o.prob * (1 - o.prob) / draws) + 1e-12);
    }
  }
}

TEST_CASE("model json dump") {
  const auto j = model_to_json(testing::dectiger());
  CHECK(j["format"] == "mcjesp-model");
  CHECK(j["num_agents"] == 2);
}
