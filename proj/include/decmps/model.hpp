#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "decmps/occupancy.hpp"

namespace decmps {

/// Mixed-radix indexer for joint states and joint actions. Digit 0 (agent 0)
/// is the most significant digit; encode/decode are mutually inverse.
class JointSpace {
 public:
  JointSpace() = default;
  explicit JointSpace(std::vector<int> radix);

  int arity() const { return static_cast<int>(radix_.size()); }
  long long size() const { return size_; }
  long long stride(int pos) const { return stride_[pos]; }
  int radix(int pos) const { return radix_[pos]; }

  long long encode(std::span<const int> digits) const;
  void decode(long long index, std::span<int> digits) const;
  int digit(long long index, int pos) const;

 private:
  std::vector<int> radix_;
  std::vector<long long> stride_;
  long long size_ = 1;
};

/// One agent's local dynamics: observation set, action set, and the local
/// transition table p(z, a, z').
struct LocalAgentModel {
  std::vector<std::string> observations;
  std::vector<std::string> actions;
  std::vector<double> transition;  // [z][a][z'] row-major

  int obs_count() const { return static_cast<int>(observations.size()); }
  int action_count() const { return static_cast<int>(actions.size()); }

  double prob(int z, int a, int z2) const {
    return transition[(static_cast<std::size_t>(z) * actions.size() + a) *
                          observations.size() +
                      z2];
  }
  double& prob_ref(int z, int a, int z2) {
    return transition[(static_cast<std::size_t>(z) * actions.size() + a) *
                          observations.size() +
                      z2];
  }

  /// Appends the nonzero (z', p) entries of one transition row to out.
  void row_support(int z, int a, std::vector<std::pair<int, double>>& out) const;
};

struct ValidationIssue {
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// Factored decentralized MDP with per-agent independent transitions, a joint
/// state space equal to the product of the agents' observation sets, a sparse
/// joint reward (default 0), a finite horizon, and an initial occupancy.
/// Immutable after construction; all operations treat it as read-only.
struct FactoredDecMdp {
  std::vector<LocalAgentModel> agents;
  std::unordered_map<std::uint64_t, double> reward_entries;  // key: s*|A|+a
  int horizon = 0;
  OccupancyDistribution initial;

  int agent_count() const { return static_cast<int>(agents.size()); }
  JointSpace state_space() const;
  JointSpace action_space() const;

  void set_reward(long long s, long long a, double value);
};

/// Checks every structural invariant and returns one issue per violation;
/// an empty report means the model is valid. Violations are reported, never
/// thrown.
ValidationReport validate(const FactoredDecMdp& model);

/// p(s, a, s') as the product of the agents' local transition probabilities.
/// Throws std::out_of_range for indices outside the joint spaces.
double joint_transition(const FactoredDecMdp& model, long long s, long long a,
                        long long s2);

/// Sparse reward lookup; absent entries are 0. Throws std::out_of_range for
/// invalid indices.
double reward(const FactoredDecMdp& model, long long s, long long a);

}  // namespace decmps
