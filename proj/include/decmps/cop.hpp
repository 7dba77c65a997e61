#pragma once

#include <string>
#include <utility>
#include <vector>

#include "decmps/heuristics.hpp"
#include "decmps/model.hpp"
#include "decmps/occupancy.hpp"
#include "decmps/policy.hpp"

namespace decmps {

/// One decision variable: the action agent `agent` takes on observation
/// `obs`. mass is the occupancy marginal of that observation; zero-mass
/// variables cannot affect the objective and are assigned action 0 after
/// search.
struct CopVariable {
  int agent = 0;
  int obs = 0;
  double mass = 0.0;
};

/// Soft constraint for one support state: scope is the n variables named by
/// the state's per-agent observations; table holds c(s, a) for every joint
/// action a. The objective accrues weight * table[assignment(s)].
struct CopStateConstraint {
  long long state = 0;
  double weight = 0.0;          // eta(s)
  std::vector<double> table;    // indexed by joint-action linear index
};

/// Correction for one stored rule: an assignment matching the rule on every
/// supported observation scores the stored value q verbatim instead of its
/// state-constraint sum. g = q minus the rule's relaxation q (<= 0 up to
/// float noise) is the additive view of the same correction; applying q
/// directly keeps repeated backups bitwise-stable.
struct CopCorrection {
  DecisionRule rule;
  double q = 0.0;
  double g = 0.0;
};

/// Maximization problem over decentralized decision rules:
///   argmax_sigma  sum_s weight(s) * c(s, sigma(s)) + g(matched rule)
struct CopProblem {
  std::vector<int> obs_radix;            // per agent
  std::vector<int> act_radix;            // per agent
  std::vector<CopVariable> variables;    // canonical (agent-major) order
  std::vector<CopStateConstraint> states;
  std::vector<CopCorrection> corrections;
};

struct CopSolution {
  DecisionRule rule;
  double objective = 0.0;
  long long nodes = 0;
  bool proved = false;
};

/// Builds the one-backup problem at (tau, eta): c tables from the relaxation
/// values at stage tau+1, one correction per rule stored at this occupancy,
/// zero-probability states omitted.
CopProblem build_backup_cop(const FactoredDecMdp& model, const BoundStore& store,
                            int tau, const OccupancyDistribution& eta);

/// Exact depth-first branch-and-bound. Deterministic: returns the provably
/// maximal assignment with the smallest canonical rule index among ties.
CopSolution solve_cop(const CopProblem& problem);

/// Debug listing of a problem, one tab-separated line per table entry.
std::string dump_cop(const CopProblem& problem);

/// Scores every rule in canonical order (stored rules by their stored q,
/// unstored rules by the relaxation q) and returns the first maximizer.
std::pair<DecisionRule, double> exhaustive_backup(
    const FactoredDecMdp& model, const BoundStore& store, int tau,
    const OccupancyDistribution& eta,
    long long enumeration_cap = kDefaultEnumerationCap);

}  // namespace decmps
