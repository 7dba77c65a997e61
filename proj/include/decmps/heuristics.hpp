#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "decmps/model.hpp"
#include "decmps/occupancy.hpp"
#include "decmps/policy.hpp"

namespace decmps {

/// Value functions of the fully coordinated relaxation: the same states and
/// rewards with one controller choosing the whole joint action. Dominates
/// every decentralized policy value pointwise, so eta-dotted-with-value is an
/// admissible upper bound at any occupancy.
struct MdpHeuristic {
  std::vector<std::vector<double>> value;    // [tau][s], tau = 0..T (v_T = 0)
  std::vector<std::vector<long long>> greedy;  // [tau][s], tau = 0..T-1
};

constexpr long long kDefaultActionCap = 1'000'000;

/// Backward induction over joint actions; greedy actions recorded with the
/// smallest joint-action index winning ties.
MdpHeuristic build_mdp_heuristic(const FactoredDecMdp& model,
                                 long long action_cap = kDefaultActionCap);

/// Per-stage bound bookkeeping for the search driver:
///  - upper bound: per visited occupancy, the refreshed q values of every
///    greedy rule ever selected there plus a cached backup value; unvisited
///    occupancies fall back to the relaxation bound.
///  - lower bound: the incumbent policy and its exact state-value table.
class BoundStore {
 public:
  struct Node {
    std::map<DecisionRule, double, RuleLess> stored;  // refreshed q per rule
    double backup_value = 0.0;  // min over backup objectives seen here
    bool has_backup = false;
  };

  BoundStore(const FactoredDecMdp& model, MdpHeuristic heuristic,
             MarkovPolicy incumbent);

  /// Relaxation bound sum_s eta(s) * v_mdp[tau](s).
  double mdp_default(int tau, const OccupancyDistribution& eta) const;

  /// 0 at the horizon; the cached backup value at visited occupancies; the
  /// relaxation bound otherwise.
  double ub_value(int tau, const OccupancyDistribution& eta) const;

  /// Records the objective of a completed backup at (tau, eta); the cached
  /// value is monotone non-increasing.
  void note_backup(int tau, const OccupancyDistribution& eta, double objective);

  /// stored[rule] <- min(previous, new_q). Only rules selected greedy at
  /// (tau, eta) are expected here.
  void ub_update(int tau, const OccupancyDistribution& eta,
                 const DecisionRule& rule, double new_q);

  /// Incumbent tail value sum_s eta(s) * v_inc[tau](s); 0 at the horizon.
  double lb_value(int tau, const OccupancyDistribution& eta) const;

  /// Replaces the incumbent iff the candidate strictly improves the value at
  /// the initial occupancy. Returns whether it replaced.
  bool lb_update(const FactoredDecMdp& model, const MarkovPolicy& candidate);

  const Node* node(int tau, const OccupancyKey& key) const;
  Node& node_for_update(int tau, const OccupancyDistribution& eta);

  const MdpHeuristic& heuristic() const { return mdp_; }
  const MarkovPolicy& incumbent() const { return incumbent_; }
  const StateValueTable& incumbent_values() const { return incumbent_values_; }

  long long entry_count() const { return entries_; }
  long long entry_cap = 10'000'000;

  /// Iteration over all stored (stage, key, rule, q) values, for
  /// instrumented monotonicity checks.
  const std::vector<std::unordered_map<OccupancyKey, Node, OccupancyKeyHash>>&
  stages() const {
    return stage_nodes_;
  }

 private:
  MdpHeuristic mdp_;
  MarkovPolicy incumbent_;
  StateValueTable incumbent_values_;
  std::vector<std::unordered_map<OccupancyKey, Node, OccupancyKeyHash>>
      stage_nodes_;
  int horizon_;
  long long entries_ = 0;
};

}  // namespace decmps
