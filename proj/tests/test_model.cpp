#include <doctest.h>

#include "decmps/bench.hpp"
#include "decmps/model.hpp"
#include "test_support.hpp"

using namespace decmps;
using test::random_model;
using test::toy_mirror_model;

TEST_CASE("mixed-radix encode/decode is a bijection") {
  const JointSpace space(std::vector<int>{3, 2, 4});
  REQUIRE(space.size() == 24);
  std::vector<int> digits(3);
  for (long long idx = 0; idx < space.size(); ++idx) {
    space.decode(idx, digits);
    CHECK(space.encode(digits) == idx);
    for (int pos = 0; pos < 3; ++pos) CHECK(space.digit(idx, pos) == digits[pos]);
  }
  // agent 0 is the most significant digit
  CHECK(space.encode(std::vector<int>{1, 0, 0}) == 8);
  CHECK(space.encode(std::vector<int>{0, 0, 1}) == 1);
}

TEST_CASE("validate flags a transition row that does not sum to 1") {
  FactoredDecMdp model = toy_mirror_model();
  model.agents[0].prob_ref(0, 0, 0) = 0.9;  // row (z=0, a=stay) now sums to 0.9
  const ValidationReport report = validate(model);
  REQUIRE_FALSE(report.ok());
  bool named = false;
  for (const auto& issue : report.issues) {
    if (issue.where.find("agent 0") != std::string::npos &&
        issue.where.find("z=0") != std::string::npos &&
        issue.where.find("a=stay") != std::string::npos) {
      named = true;
    }
  }
  CHECK(named);
}

TEST_CASE("validate flags a bad initial occupancy") {
  FactoredDecMdp model = toy_mirror_model();
  model.initial.p[0] = 0.1;  // sums to 1.1
  const ValidationReport report = validate(model);
  REQUIRE_FALSE(report.ok());
  bool named = false;
  for (const auto& issue : report.issues) {
    if (issue.where.find("initial occupancy") != std::string::npos) named = true;
  }
  CHECK(named);
}

TEST_CASE("generator outputs validate cleanly") {
  CHECK(validate(gen_recycling()).ok());
  CHECK(validate(gen_meeting_grid(3, 0.1)).ok());
  CHECK(validate(gen_random_team(3, 2, 7)).ok());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(validate(random_model(seed)).ok());
  }
}

TEST_CASE("joint transition is the product of local probabilities") {
  FactoredDecMdp model = toy_mirror_model();
  // both stay: state maps to itself with probability 1
  CHECK(joint_transition(model, 1, 0, 1) == 1.0);
  CHECK(joint_transition(model, 1, 0, 0) == 0.0);

  // explicit product: agent 0 prob 0.5, agent 1 prob 0.4
  model.agents[0].prob_ref(0, 0, 0) = 0.5;
  model.agents[0].prob_ref(0, 0, 1) = 0.5;
  model.agents[1].prob_ref(1, 0, 1) = 0.4;
  model.agents[1].prob_ref(1, 0, 0) = 0.6;
  CHECK(joint_transition(model, 1, 0, 1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("joint transition rows sum to 1 over all successors") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const FactoredDecMdp model = random_model(seed);
    const long long ns = model.state_space().size();
    const long long na = model.action_space().size();
    for (long long s = 0; s < ns; ++s) {
      for (long long a = 0; a < na; ++a) {
        double sum = 0.0;
        for (long long s2 = 0; s2 < ns; ++s2) sum += joint_transition(model, s, a, s2);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("joint transition range errors") {
  const FactoredDecMdp model = toy_mirror_model();
  CHECK_THROWS_AS(joint_transition(model, 4, 0, 0), std::out_of_range);
  CHECK_THROWS_AS(joint_transition(model, 0, 9, 0), std::out_of_range);
  CHECK_THROWS_AS(reward(model, -1, 0), std::out_of_range);
  CHECK_THROWS_AS(reward(model, 0, 4), std::out_of_range);
}

TEST_CASE("reward lookup is sparse with default 0") {
  FactoredDecMdp model = toy_mirror_model();
  CHECK(reward(model, 1, 0) == 0.0);  // absent entry
  model.set_reward(1, 2, 1.0);
  CHECK(reward(model, 1, 2) == 1.0);
}

TEST_CASE("interaction-event rewards are reproducible from the seed") {
  const FactoredDecMdp a = gen_random_team(2, 2, 42);
  const FactoredDecMdp b = gen_random_team(2, 2, 42);
  REQUIRE(a.reward_entries.size() == b.reward_entries.size());
  for (const auto& [key, value] : a.reward_entries) {
    REQUIRE(b.reward_entries.count(key) == 1);
    CHECK(b.reward_entries.at(key) == value);  // bit-exact
  }
}
