#include "decmps/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "decmps/util.hpp"

namespace decmps {

namespace {

struct Descent {
  const FactoredDecMdp& model;
  BoundStore& store;
  const SolveConfig& config;
  long long inner_cap;
  TrialTrace& trace;
  std::vector<bool> entered;

  void run(int tau, const OccupancyDistribution& eta,
           const std::optional<FactoredOccupancy>& feta) {
    const int T = model.horizon;
    if (tau >= T) return;

    if (!entered[tau]) {
      entered[tau] = true;
      trace.gap_before_after[tau].first =
          store.ub_value(tau, eta) - store.lb_value(tau, eta);
    }

    const OccupancyKey key = key_of(eta);
    std::optional<DecisionRule> last_rule;
    double last_stored = 0.0;
    double last_value = 0.0;
    long long iterations = 0;

    while (store.ub_value(tau, eta) - store.lb_value(tau, eta) >
           config.epsilon) {
      if (++iterations > inner_cap) break;

      DecisionRule greedy;
      double objective = 0.0;
      if (config.mode == BackupMode::exhaustive) {
        std::tie(greedy, objective) =
            exhaustive_backup(model, store, tau, eta, config.enumeration_cap);
      } else {
        const CopSolution sol = solve_cop(build_backup_cop(model, store, tau, eta));
        greedy = sol.rule;
        objective = sol.objective;
      }
      ++trace.backups;
      store.note_backup(tau, eta, objective);
      store.ub_update(tau, eta, greedy, objective);

      OccupancyDistribution child;
      std::optional<FactoredOccupancy> child_f;
      if (feta) {
        child_f = advance_factored(model, *feta, greedy);
        child = join(*child_f);
      } else {
        child = advance(model, eta, greedy);
      }
      run(tau + 1, child, child_f);

      const double refreshed =
          expected_reward(model, eta, greedy) + store.ub_value(tau + 1, child);
      store.ub_update(tau, eta, greedy, refreshed);
      trace.path[tau] = greedy;

      // Offer the current greedy path (incumbent rules at unvisited stages)
      // as a lower-bound candidate after every recursion, so the loop
      // condition sees a fresh incumbent instead of grinding on a stale one.
      MarkovPolicy candidate = store.incumbent();
      for (int stage = 0; stage < T; ++stage) {
        if (trace.path[stage]) candidate.rules[stage] = *trace.path[stage];
      }
      const bool improved = store.lb_update(model, candidate);

      // Stop when an iteration changed nothing at this level: the next
      // iteration would repeat it verbatim. The root loop still re-descends
      // until the root gap closes.
      const double now_stored = store.node(tau, key)->stored.at(greedy);
      const double now_value = store.ub_value(tau, eta);
      if (!improved && last_rule && *last_rule == greedy &&
          now_stored == last_stored && now_value == last_value) {
        break;
      }
      last_rule = greedy;
      last_stored = now_stored;
      last_value = now_value;
    }

    trace.gap_before_after[tau].second =
        store.ub_value(tau, eta) - store.lb_value(tau, eta);
  }
};

}  // namespace

TrialTrace trial(const FactoredDecMdp& model, BoundStore& store,
                 const OccupancyDistribution& eta0, const SolveConfig& config) {
  const int T = model.horizon;
  TrialTrace trace;
  trace.path.assign(T, std::nullopt);
  trace.gap_before_after.assign(T, {0.0, 0.0});

  long long inner_cap = config.inner_iteration_cap_cop;
  if (config.mode == BackupMode::exhaustive) {
    inner_cap = rule_count(model).value;
  }

  Descent descent{model, store, config, inner_cap, trace,
                  std::vector<bool>(T, false)};
  descent.run(0, eta0, factor_rank1(eta0, model));
  return trace;
}

Solution solve(const FactoredDecMdp& model, const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  const ValidationReport report = validate(model);
  if (!report.ok()) {
    throw std::invalid_argument("invalid model: " + report.issues[0].where +
                                ": " + report.issues[0].message);
  }
  if (config.mode == BackupMode::exhaustive) {
    const RuleCount rc = rule_count(model);
    if (rc.saturated || rc.value > config.enumeration_cap) {
      throw CapacityError(
          "decision-rule space too large for exhaustive backups; use cop mode");
    }
  }

  MdpHeuristic heuristic = build_mdp_heuristic(model);
  MarkovPolicy incumbent = config.zero_incumbent
                               ? zero_policy(model)
                               : random_policy(model, config.seed);
  BoundStore store(model, std::move(heuristic), std::move(incumbent));
  const OccupancyDistribution& eta0 = model.initial;

  Solution sol;
  while (true) {
    const double lower = store.lb_value(0, eta0);
    const double upper = store.ub_value(0, eta0);
    if (upper - lower <= config.epsilon) {
      sol.converged = true;
      break;
    }
    if (sol.trials >= config.trial_cap) {
      sol.converged = false;
      break;
    }

    const TrialTrace tt = trial(model, store, eta0, config);
    sol.backups += tt.backups;

    MarkovPolicy candidate = store.incumbent();
    for (int tau = 0; tau < model.horizon; ++tau) {
      if (tt.path[tau]) candidate.rules[tau] = *tt.path[tau];
    }
    store.lb_update(model, candidate);

    ++sol.trials;
    TrialRecord record{sol.trials, store.lb_value(0, eta0),
                       store.ub_value(0, eta0), elapsed(), sol.backups};
    sol.trace.push_back(record);
    if (config.on_trial) config.on_trial(record, store);
  }

  sol.policy = store.incumbent();
  sol.lower = store.lb_value(0, eta0);
  sol.upper = store.ub_value(0, eta0);
  sol.gap = sol.upper - sol.lower;
  sol.wall_seconds = elapsed();
  return sol;
}

}  // namespace decmps
