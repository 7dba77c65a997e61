#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "decmps/model.hpp"
#include "decmps/occupancy.hpp"

namespace decmps {

/// One stage of decentralized control: for each agent, a total mapping from
/// local observation index to local action index.
struct DecisionRule {
  std::vector<std::vector<int>> action;  // [agent][obs]

  bool operator==(const DecisionRule&) const = default;

  /// Joint action taken at the joint state whose per-agent observations are
  /// obs_digits.
  long long joint_action(std::span<const int> obs_digits,
                         const JointSpace& action_space) const;
};

/// Canonical ordering: lexicographic over the (agent, observation) slots in
/// agent-major, observation-minor order with the action index as digit. This
/// is the tie-breaking order used everywhere an argmax over rules occurs.
bool canonical_less(const DecisionRule& a, const DecisionRule& b);

struct RuleLess {
  bool operator()(const DecisionRule& a, const DecisionRule& b) const {
    return canonical_less(a, b);
  }
};

struct RuleCount {
  long long value = 0;
  bool saturated = false;  // true when the true count overflows long long
};

/// Number of decentralized decision rules, prod_i |A^i|^{|Z^i|}, saturating.
RuleCount rule_count(const FactoredDecMdp& model);

/// Canonical linear index of a rule. Only meaningful when rule_count is not
/// saturated.
long long canonical_index(const DecisionRule& rule, const FactoredDecMdp& model);

constexpr long long kDefaultEnumerationCap = 10'000'000;

/// Streams every decision rule exactly once in increasing canonical order.
/// Refuses to start when the rule space exceeds cap.
class RuleEnumerator {
 public:
  explicit RuleEnumerator(const FactoredDecMdp& model,
                          long long cap = kDefaultEnumerationCap);
  bool next(DecisionRule& out);

 private:
  std::vector<int> act_radix_;   // per slot: |A^i| of the slot's agent
  std::vector<int> slot_agent_;  // slot -> agent
  std::vector<int> slot_obs_;    // slot -> observation
  DecisionRule current_;
  bool exhausted_ = false;
  bool first_ = true;
};

/// Horizon-length sequence of decision rules.
struct MarkovPolicy {
  std::vector<DecisionRule> rules;
};

/// Per-stage state values v[tau][s] for tau = 0..T; v[T] is identically 0.
struct StateValueTable {
  std::vector<std::vector<double>> v;
};

/// Exact backward induction of the policy's value at every stage and state.
StateValueTable evaluate_policy(const FactoredDecMdp& model,
                                const MarkovPolicy& pi);

/// Inner product of eta with the stage-tau value vector.
double value_at(const StateValueTable& table, int tau,
                const OccupancyDistribution& eta);

/// Uniform random policy from a seeded platform-independent generator.
MarkovPolicy random_policy(const FactoredDecMdp& model, std::uint64_t seed);

/// All-zero-action policy, for reproducibility comparisons.
MarkovPolicy zero_policy(const FactoredDecMdp& model);

}  // namespace decmps
