#pragma once

#include <cstdint>
#include <utility>

#include "decmps/model.hpp"
#include "decmps/policy.hpp"

namespace decmps {

/// Two-agent model with an unrestricted joint transition table. Covers both
/// product-form dynamics (adapted from FactoredDecMdp) and deliberately
/// coupled dynamics used to show that the history/Markov equivalence fails
/// without transition independence.
struct CoupledDecMdp {
  int z1 = 0, z2 = 0;  // local observation counts
  int a1 = 0, a2 = 0;  // local action counts
  int horizon = 0;
  std::vector<double> transition;  // [s][a][s'], s = z1_idx * z2 + z2_idx
  std::vector<double> reward;      // [s][a]
  std::vector<double> initial;

  int ns() const { return z1 * z2; }
  int na() const { return a1 * a2; }
  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * na() + a) * ns() + s2];
  }
  double& p_ref(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * na() + a) * ns() + s2];
  }
  double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * na() + a]; }
  double& r_ref(int s, int a) { return reward[static_cast<std::size_t>(s) * na() + a]; }
};

/// Dense two-agent view of a factored model (product transitions).
CoupledDecMdp couple(const FactoredDecMdp& model);

constexpr long long kDefaultOracleCap = 10'000'000;

/// Enumerates every Markov policy, scoring each by forward occupancy
/// propagation, and returns the maximum with the first maximizer in
/// canonical (stage-lexicographic) order. Refuses when rule_count^T exceeds
/// the cap.
std::pair<double, MarkovPolicy> best_markov(const FactoredDecMdp& model,
                                            long long cap = kDefaultOracleCap);

/// Same search over a coupled model.
double best_markov_value(const CoupledDecMdp& model,
                         long long cap = kDefaultOracleCap);

/// Enumerates every decentralized history-dependent policy (each agent maps
/// its full local action-observation history, initial observation included,
/// to an action) and evaluates by exhaustive trajectory expansion.
double best_history(const FactoredDecMdp& model,
                    long long cap = kDefaultOracleCap);
double best_history_value(const CoupledDecMdp& model,
                          long long cap = kDefaultOracleCap);

/// Random coupled instance. With dependent=false the joint transition is the
/// product of two seeded local tables; with dependent=true agent 1's local
/// row additionally varies with agent 2's observation, breaking transition
/// independence.
CoupledDecMdp random_coupled(std::uint64_t seed, int z1, int z2, int a1, int a2,
                             int horizon, bool dependent);

/// Fixed instance where remembering the first observation is worth 0.5:
/// agent 1's next observation copies agent 2's, agent 2's observation
/// resets, and the last-stage reward pays agent 2 for announcing what it saw
/// first. Markov policies achieve 0.5, history policies 1.0.
CoupledDecMdp memory_gap_instance();

}  // namespace decmps
