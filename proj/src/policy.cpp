#include "decmps/policy.hpp"

#include <limits>

#include "decmps/util.hpp"

namespace decmps {

long long DecisionRule::joint_action(std::span<const int> obs_digits,
                                     const JointSpace& action_space) const {
  long long idx = 0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    idx += action[i][obs_digits[i]] * action_space.stride(static_cast<int>(i));
  }
  return idx;
}

bool canonical_less(const DecisionRule& a, const DecisionRule& b) {
  for (std::size_t i = 0; i < a.action.size(); ++i) {
    for (std::size_t z = 0; z < a.action[i].size(); ++z) {
      if (a.action[i][z] != b.action[i][z]) return a.action[i][z] < b.action[i][z];
    }
  }
  return false;
}

RuleCount rule_count(const FactoredDecMdp& model) {
  constexpr long long kMax = std::numeric_limits<long long>::max();
  RuleCount rc{1, false};
  for (const auto& ag : model.agents) {
    const long long base = ag.action_count();
    for (int z = 0; z < ag.obs_count(); ++z) {
      if (rc.value > kMax / base) return {kMax, true};
      rc.value *= base;
    }
  }
  return rc;
}

long long canonical_index(const DecisionRule& rule, const FactoredDecMdp& model) {
  long long idx = 0;
  for (int i = 0; i < model.agent_count(); ++i) {
    const long long base = model.agents[i].action_count();
    for (int z = 0; z < model.agents[i].obs_count(); ++z) {
      idx = idx * base + rule.action[i][z];
    }
  }
  return idx;
}

RuleEnumerator::RuleEnumerator(const FactoredDecMdp& model, long long cap) {
  const RuleCount rc = rule_count(model);
  if (rc.saturated || rc.value > cap) {
    throw CapacityError(
        "decision-rule space has " +
        (rc.saturated ? std::string("more than 2^63") : std::to_string(rc.value)) +
        " rules, over the enumeration cap of " + std::to_string(cap) +
        "; use the cop backup mode instead");
  }
  current_.action.resize(model.agent_count());
  for (int i = 0; i < model.agent_count(); ++i) {
    current_.action[i].assign(model.agents[i].obs_count(), 0);
    for (int z = 0; z < model.agents[i].obs_count(); ++z) {
      act_radix_.push_back(model.agents[i].action_count());
      slot_agent_.push_back(i);
      slot_obs_.push_back(z);
    }
  }
}

bool RuleEnumerator::next(DecisionRule& out) {
  if (exhausted_) return false;
  if (first_) {
    first_ = false;
    out = current_;
    return true;
  }
  // Odometer increment, last slot fastest, so canonical order is ascending.
  for (int slot = static_cast<int>(act_radix_.size()) - 1; slot >= 0; --slot) {
    int& digit = current_.action[slot_agent_[slot]][slot_obs_[slot]];
    if (++digit < act_radix_[slot]) {
      out = current_;
      return true;
    }
    digit = 0;
  }
  exhausted_ = true;
  return false;
}

StateValueTable evaluate_policy(const FactoredDecMdp& model,
                                const MarkovPolicy& pi) {
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const int T = model.horizon;
  const long long ns = states.size();

  StateValueTable table;
  table.v.assign(T + 1, std::vector<double>(ns, 0.0));

  std::vector<int> obs(model.agent_count());
  std::vector<std::pair<int, double>> row;
  for (int tau = T - 1; tau >= 0; --tau) {
    const DecisionRule& rule = pi.rules[tau];
    for (long long s = 0; s < ns; ++s) {
      states.decode(s, obs);
      const long long a = rule.joint_action(obs, actions);
      double v = reward(model, s, a);
      // successor sum over the product of nonzero local rows
      auto expand = [&](auto&& self, int depth, long long idx, double prob) -> void {
        if (depth == model.agent_count()) {
          v += prob * table.v[tau + 1][idx];
          return;
        }
        const auto& ag = model.agents[depth];
        const int z = obs[depth];
        const int act = rule.action[depth][z];
        for (int z2 = 0; z2 < ag.obs_count(); ++z2) {
          const double p = ag.prob(z, act, z2);
          if (p > 0.0) self(self, depth + 1, idx + z2 * states.stride(depth), prob * p);
        }
      };
      expand(expand, 0, 0, 1.0);
      table.v[tau][s] = v;
    }
  }
  return table;
}

double value_at(const StateValueTable& table, int tau,
                const OccupancyDistribution& eta) {
  const auto& v = table.v[tau];
  double total = 0.0;
  for (std::size_t s = 0; s < eta.p.size(); ++s) total += eta.p[s] * v[s];
  return total;
}

MarkovPolicy random_policy(const FactoredDecMdp& model, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MarkovPolicy pi;
  pi.rules.resize(model.horizon);
  for (auto& rule : pi.rules) {
    rule.action.resize(model.agent_count());
    for (int i = 0; i < model.agent_count(); ++i) {
      rule.action[i].resize(model.agents[i].obs_count());
      for (int& a : rule.action[i]) {
        a = static_cast<int>(rng.below(model.agents[i].action_count()));
      }
    }
  }
  return pi;
}

MarkovPolicy zero_policy(const FactoredDecMdp& model) {
  MarkovPolicy pi;
  pi.rules.resize(model.horizon);
  for (auto& rule : pi.rules) {
    rule.action.resize(model.agent_count());
    for (int i = 0; i < model.agent_count(); ++i) {
      rule.action[i].assign(model.agents[i].obs_count(), 0);
    }
  }
  return pi;
}

}  // namespace decmps
