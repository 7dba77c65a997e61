#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "decmps/cop.hpp"
#include "decmps/heuristics.hpp"
#include "decmps/model.hpp"
#include "decmps/policy.hpp"

namespace decmps {

enum class BackupMode { exhaustive, cop };

struct TrialRecord {
  long long trial = 0;
  double lower = 0.0;
  double upper = 0.0;
  double seconds = 0.0;    // elapsed wall time at the trial boundary
  long long backups = 0;   // cumulative
};

struct SolveConfig {
  double epsilon = 1e-4;
  BackupMode mode = BackupMode::cop;
  long long trial_cap = 1'000'000;
  std::uint64_t seed = 0;  // seeds the initial lower-bound policy
  long long enumeration_cap = kDefaultEnumerationCap;
  long long inner_iteration_cap_cop = 10'000;
  bool zero_incumbent = false;  // all-zero-actions initial policy instead of seeded random
  // Invoked after every trial with the record and the store, for
  // instrumented runs; not called on the converged-before-first-trial path.
  std::function<void(const TrialRecord&, const BoundStore&)> on_trial;
};

struct Solution {
  MarkovPolicy policy;
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  bool converged = false;
  long long trials = 0;
  long long backups = 0;
  double wall_seconds = 0.0;
  std::vector<TrialRecord> trace;
};

/// One root-to-horizon greedy descent: at each stage, while the local gap
/// exceeds epsilon, select the greedy rule, recurse on the advanced
/// occupancy, then refresh the rule's stored q from the child's updated
/// bound.
struct TrialTrace {
  std::vector<std::optional<DecisionRule>> path;  // last greedy rule per stage
  std::vector<std::pair<double, double>> gap_before_after;
  long long backups = 0;
};

TrialTrace trial(const FactoredDecMdp& model, BoundStore& store,
                 const OccupancyDistribution& eta0, const SolveConfig& config);

/// Repeats trials until the root gap closes to epsilon or the trial cap is
/// reached; after each trial the greedy rules along the trial path (filled
/// with incumbent rules at unvisited stages) are offered as a lower-bound
/// candidate.
Solution solve(const FactoredDecMdp& model, const SolveConfig& config = {});

}  // namespace decmps
