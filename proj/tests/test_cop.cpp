#include <doctest.h>

#include "decmps/cop.hpp"
#include "decmps/solver.hpp"
#include "decmps/util.hpp"
#include "test_support.hpp"

using namespace decmps;
using test::random_model;
using test::toy_mirror_model;

namespace {

/// Independent evaluator: objective of one assignment straight from the
/// problem tables. A correction applies to every rule that agrees with it on
/// the supported observations, provided the stored rule itself is in
/// zero-filled form; anything else can never have been stored.
double brute_objective(const CopProblem& p, const DecisionRule& rule) {
  const JointSpace actions{std::vector<int>(p.act_radix)};
  const JointSpace states{std::vector<int>(p.obs_radix)};
  std::vector<int> obs(p.obs_radix.size());
  double total = 0.0;
  for (const auto& sc : p.states) {
    states.decode(sc.state, obs);
    total += sc.weight * sc.table[rule.joint_action(obs, actions)];
  }
  std::size_t var = 0;
  std::vector<std::vector<bool>> mask(p.obs_radix.size());
  for (std::size_t i = 0; i < p.obs_radix.size(); ++i) {
    mask[i].resize(p.obs_radix[i]);
    for (int z = 0; z < p.obs_radix[i]; ++z) mask[i][z] = p.variables[var++].mass > 0.0;
  }
  for (const auto& corr : p.corrections) {
    bool applies = true;
    for (std::size_t i = 0; i < p.obs_radix.size() && applies; ++i) {
      for (int z = 0; z < p.obs_radix[i] && applies; ++z) {
        if (mask[i][z] ? corr.rule.action[i][z] != rule.action[i][z]
                       : corr.rule.action[i][z] != 0) {
          applies = false;
        }
      }
    }
    if (applies) return corr.q;
  }
  return total;
}

/// Canonical-first maximizer by full enumeration over all assignments.
std::pair<DecisionRule, double> brute_solve(const CopProblem& p) {
  DecisionRule rule;
  rule.action.resize(p.obs_radix.size());
  for (std::size_t i = 0; i < p.obs_radix.size(); ++i) {
    rule.action[i].assign(p.obs_radix[i], 0);
  }
  DecisionRule best_rule = rule;
  double best = brute_objective(p, rule);
  while (true) {
    // odometer in canonical order, last slot fastest
    int i = static_cast<int>(p.obs_radix.size()) - 1;
    int z = p.obs_radix[i] - 1;
    while (i >= 0) {
      if (++rule.action[i][z] < p.act_radix[i]) break;
      rule.action[i][z] = 0;
      if (--z < 0) {
        --i;
        if (i >= 0) z = p.obs_radix[i] - 1;
      }
    }
    if (i < 0) break;
    const double v = brute_objective(p, rule);
    if (v > best) {
      best = v;
      best_rule = rule;
    }
  }
  return {best_rule, best};
}

CopProblem random_problem(std::uint64_t seed) {
  SplitMix64 rng(seed);
  CopProblem p;
  const int n = 2 + static_cast<int>(rng.below(2));
  long long total_rules = 1;
  for (int i = 0; i < n; ++i) {
    p.obs_radix.push_back(2 + static_cast<int>(rng.below(2)));
    p.act_radix.push_back(2 + static_cast<int>(rng.below(2)));
    for (int z = 0; z < p.obs_radix[i]; ++z) total_rules *= p.act_radix[i];
  }
  REQUIRE(total_rules <= 100'000);

  const JointSpace states{std::vector<int>(p.obs_radix)};
  const JointSpace actions{std::vector<int>(p.act_radix)};
  for (int i = 0; i < n; ++i) {
    for (int z = 0; z < p.obs_radix[i]; ++z) p.variables.push_back({i, z, 0.0});
  }
  std::vector<int> var_base(n, 0);
  for (int i = 1; i < n; ++i) var_base[i] = var_base[i - 1] + p.obs_radix[i - 1];

  // random support with random weights
  std::vector<int> obs(n);
  for (long long s = 0; s < states.size(); ++s) {
    if (rng.unit() < 0.3) continue;  // leave some states out of the support
    CopStateConstraint sc;
    sc.state = s;
    sc.weight = rng.unit() + 0.01;
    sc.table.resize(actions.size());
    for (double& c : sc.table) c = 2.0 * rng.unit() - 1.0;
    states.decode(s, obs);
    for (int i = 0; i < n; ++i) p.variables[var_base[i] + obs[i]].mass += sc.weight;
    p.states.push_back(std::move(sc));
  }
  if (p.states.empty()) {
    CopStateConstraint sc;
    sc.state = 0;
    sc.weight = 1.0;
    sc.table.assign(actions.size(), 0.0);
    for (double& c : sc.table) c = rng.unit();
    states.decode(0, obs);
    for (int i = 0; i < n; ++i) p.variables[var_base[i] + obs[i]].mass += sc.weight;
    p.states.push_back(std::move(sc));
  }

  // a few corrections, g <= 0; mostly in stored (zero-filled) form, with the
  // occasional off-support junk rule that both solvers must ignore
  const int n_corr = static_cast<int>(rng.below(4));
  for (int c = 0; c < n_corr; ++c) {
    CopCorrection corr;
    corr.rule.action.resize(n);
    const bool junk = rng.unit() < 0.15;
    for (int i = 0; i < n; ++i) {
      corr.rule.action[i].resize(p.obs_radix[i]);
      for (int z = 0; z < p.obs_radix[i]; ++z) {
        const bool supported = p.variables[var_base[i] + z].mass > 0.0;
        corr.rule.action[i][z] = supported || junk
                                     ? static_cast<int>(rng.below(p.act_radix[i]))
                                     : 0;
      }
    }
    corr.g = -rng.unit();
    double base = 0.0;
    for (const auto& sc : p.states) {
      states.decode(sc.state, obs);
      base += sc.weight * sc.table[corr.rule.joint_action(obs, actions)];
    }
    corr.q = base + corr.g;
    p.corrections.push_back(std::move(corr));
  }
  return p;
}

}  // namespace

TEST_CASE("single effective variable picks the best action") {
  CopProblem p;
  p.obs_radix = {1, 1};
  p.act_radix = {2, 1};
  p.variables = {{0, 0, 1.0}, {1, 0, 1.0}};
  CopStateConstraint sc;
  sc.state = 0;
  sc.weight = 1.0;
  sc.table = {1.0, 2.0};  // joint actions (a0,b0), (a1,b0)
  p.states.push_back(sc);

  const CopSolution sol = solve_cop(p);
  CHECK(sol.objective == 2.0);
  CHECK(sol.rule.action[0][0] == 1);
  CHECK(sol.proved);
}

TEST_CASE("backup problem shape on the toy model") {
  const FactoredDecMdp model = toy_mirror_model();
  BoundStore store(model, build_mdp_heuristic(model), zero_policy(model));
  const CopProblem p = build_backup_cop(model, store, 0, model.initial);

  CHECK(p.variables.size() == 4);  // every (agent, observation) pair exists
  REQUIRE(p.states.size() == 1);   // point mass: one support state
  CHECK(p.states[0].state == 1);
  CHECK(p.states[0].table.size() == 4);
  CHECK(p.corrections.empty());  // nothing stored yet

  // only the observed local states carry mass
  int massive = 0;
  for (const auto& v : p.variables) {
    if (v.mass > 0.0) ++massive;
  }
  CHECK(massive == 2);

  // objective with no corrections reduces to the relaxation q of the rule:
  // the winner flips exactly one agent and scores 1
  const CopSolution sol = solve_cop(p);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("horizon-stage backup is rejected") {
  const FactoredDecMdp model = toy_mirror_model();
  BoundStore store(model, build_mdp_heuristic(model), zero_policy(model));
  OccupancyDistribution eta = model.initial;
  eta.stage = model.horizon;
  CHECK_THROWS_AS(build_backup_cop(model, store, model.horizon, eta), HorizonError);
  CHECK_THROWS_AS(exhaustive_backup(model, store, model.horizon, eta), HorizonError);
}

TEST_CASE("a freshly stored rule gets a zero correction") {
  const FactoredDecMdp model = toy_mirror_model();
  BoundStore store(model, build_mdp_heuristic(model), zero_policy(model));
  const auto [rule, value] = exhaustive_backup(model, store, 0, model.initial);
  store.ub_update(0, model.initial, rule, value);

  const CopProblem p = build_backup_cop(model, store, 0, model.initial);
  REQUIRE(p.states.size() == 1);
  REQUIRE(p.corrections.size() == 1);
  CHECK(p.corrections[0].rule == rule);
  CHECK(p.corrections[0].g == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("corrections flip the argmax only when they outweigh the runner-up") {
  CopProblem p;
  p.obs_radix = {1, 1};
  p.act_radix = {2, 1};
  p.variables = {{0, 0, 1.0}, {1, 0, 1.0}};
  CopStateConstraint sc;
  sc.state = 0;
  sc.weight = 1.0;
  sc.table = {2.0, 1.75};
  p.states.push_back(sc);
  CopCorrection corr;
  corr.rule.action = {{0}, {0}};  // the enumeration winner
  corr.g = -0.5;
  corr.q = 2.0 + corr.g;
  p.corrections.push_back(corr);

  // corrected winner: 2.0 - 0.5 = 1.5 < 1.75, the runner-up takes over
  CopSolution sol = solve_cop(p);
  CHECK(sol.objective == doctest::Approx(1.75));
  CHECK(sol.rule.action[0][0] == 1);

  // smaller correction: winner keeps the lead
  p.corrections[0].g = -0.1;
  p.corrections[0].q = 2.0 - 0.1;
  sol = solve_cop(p);
  CHECK(sol.objective == doctest::Approx(1.9));
  CHECK(sol.rule.action[0][0] == 0);
}

TEST_CASE("solver matches brute-force enumeration on random problems") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const CopProblem p = random_problem(seed);
    const CopSolution sol = solve_cop(p);
    const auto [brute_rule, brute_value] = brute_solve(p);
    CHECK(std::abs(sol.objective - brute_value) <= 1e-9);
    CHECK(sol.rule == brute_rule);
  }
}

TEST_CASE("canonical tie-breaking on an exactly tied problem") {
  // dyadic values: both rules with action sums equal; canonical first wins
  CopProblem p;
  p.obs_radix = {2, 1};
  p.act_radix = {2, 2};
  p.variables = {{0, 0, 0.5}, {0, 1, 0.5}, {1, 0, 1.0}};
  for (long long s = 0; s < 2; ++s) {
    CopStateConstraint sc;
    sc.state = s;
    sc.weight = 0.5;
    sc.table = {1.0, 0.5, 0.5, 1.0};  // (a,b): ties across symmetric choices
    p.states.push_back(sc);
  }
  const CopSolution sol = solve_cop(p);
  const auto [brute_rule, brute_value] = brute_solve(p);
  CHECK(sol.objective == brute_value);
  CHECK(sol.rule == brute_rule);
  // all-zeros reaches the maximum here, so canonical-first returns it
  CHECK(sol.rule.action == std::vector<std::vector<int>>{{0, 0}, {0}});
}

TEST_CASE("zero-probability states do not change the argmax") {
  for (std::uint64_t seed = 300; seed < 320; ++seed) {
    CopProblem p = random_problem(seed);
    const CopSolution before = solve_cop(p);

    CopProblem padded = p;
    const JointSpace states{std::vector<int>(p.obs_radix)};
    for (long long s = 0; s < states.size() && padded.states.size() < p.states.size() + 2; ++s) {
      bool used = false;
      for (const auto& sc : p.states) {
        if (sc.state == s) used = true;
      }
      if (used) continue;
      CopStateConstraint sc;
      sc.state = s;
      sc.weight = 0.0;
      sc.table.assign(p.states[0].table.size(), 5.0);
      padded.states.push_back(sc);
    }
    const CopSolution after = solve_cop(padded);
    CHECK(after.objective == doctest::Approx(before.objective).epsilon(1e-12));
    CHECK(after.rule == before.rule);
  }
}

TEST_CASE("exhaustive backup on a singleton rule space") {
  FactoredDecMdp model;
  model.horizon = 1;
  for (int i = 0; i < 2; ++i) {
    LocalAgentModel ag;
    ag.observations = {"z"};
    ag.actions = {"only"};
    ag.transition = {1.0};
    model.agents.push_back(ag);
  }
  model.initial.stage = 0;
  model.initial.p = {1.0};
  model.set_reward(0, 0, 2.5);
  BoundStore store(model, build_mdp_heuristic(model), zero_policy(model));
  const auto [rule, value] = exhaustive_backup(model, store, 0, model.initial);
  CHECK(value == 2.5);
  CHECK(rule.action == std::vector<std::vector<int>>{{0}, {0}});
}

TEST_CASE("toy backup picks a one-flip rule with score 1") {
  const FactoredDecMdp model = toy_mirror_model();
  BoundStore store(model, build_mdp_heuristic(model), zero_policy(model));
  const auto [rule, value] = exhaustive_backup(model, store, 0, model.initial);
  CHECK(value == doctest::Approx(1.0).epsilon(1e-12));
  // canonical-first tie peer: agent 1 flips on its observed "1"
  CHECK(rule.action == std::vector<std::vector<int>>{{0, 0}, {0, 1}});
}

TEST_CASE("exhaustive and cop backups agree through solver-produced stores") {
  test::RandomModelOpts opts;
  opts.max_horizon = 3;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FactoredDecMdp model = random_model(seed, opts);
    MdpHeuristic h = build_mdp_heuristic(model);
    BoundStore store(model, std::move(h), random_policy(model, seed));

    // populate the store with a few greedy cycles at a random prefix
    SplitMix64 rng(seed + 99);
    OccupancyDistribution eta = model.initial;
    const int tau = static_cast<int>(rng.below(model.horizon));
    for (int step = 0; step < tau; ++step) {
      eta = advance(model, eta, random_policy(model, rng.next()).rules[0]);
    }
    for (int round = 0; round < static_cast<int>(rng.below(3)); ++round) {
      const auto [rule, value] = exhaustive_backup(model, store, tau, eta);
      store.note_backup(tau, eta, value);
      store.ub_update(tau, eta, rule, value);
      store.ub_update(tau, eta, rule, value - rng.unit());
    }

    const auto [ex_rule, ex_value] = exhaustive_backup(model, store, tau, eta);
    const CopSolution cop = solve_cop(build_backup_cop(model, store, tau, eta));
    CHECK(std::abs(ex_value - cop.objective) <= 1e-9);
    CHECK(ex_rule == cop.rule);
  }
}

TEST_CASE("debug dump lists variables, entries and corrections") {
  const FactoredDecMdp model = toy_mirror_model();
  BoundStore store(model, build_mdp_heuristic(model), zero_policy(model));
  const auto [rule, value] = exhaustive_backup(model, store, 0, model.initial);
  store.ub_update(0, model.initial, rule, value);
  const std::string dump = dump_cop(build_backup_cop(model, store, 0, model.initial));
  CHECK(dump.find("var\t0\tagent\t0") != std::string::npos);
  CHECK(dump.find("c\t1\t0\t") != std::string::npos);
  CHECK(dump.find("g\t0\t") != std::string::npos);
}
