#pragma once

#include <cmath>
#include <vector>

#include "decmps/model.hpp"
#include "decmps/occupancy.hpp"
#include "decmps/policy.hpp"
#include "decmps/util.hpp"

namespace decmps::test {

struct RandomModelOpts {
  int n_agents = 2;
  int min_obs = 2, max_obs = 3;
  int min_act = 2, max_act = 3;
  int min_horizon = 1, max_horizon = 3;
  double reward_density = 0.4;
  bool signed_rewards = true;
  bool point_start = false;
  bool product_start = false;
};

/// Seeded random transition-independent model with full-support rows.
inline FactoredDecMdp random_model(std::uint64_t seed,
                                   const RandomModelOpts& opts = {}) {
  SplitMix64 rng(seed);
  FactoredDecMdp model;
  model.horizon = opts.min_horizon +
                  static_cast<int>(rng.below(opts.max_horizon - opts.min_horizon + 1));
  for (int i = 0; i < opts.n_agents; ++i) {
    LocalAgentModel ag;
    const int nz = opts.min_obs + static_cast<int>(rng.below(opts.max_obs - opts.min_obs + 1));
    const int na = opts.min_act + static_cast<int>(rng.below(opts.max_act - opts.min_act + 1));
    for (int z = 0; z < nz; ++z) ag.observations.push_back("z" + std::to_string(z));
    for (int a = 0; a < na; ++a) ag.actions.push_back("a" + std::to_string(a));
    ag.transition.assign(static_cast<std::size_t>(nz) * na * nz, 0.0);
    for (int z = 0; z < nz; ++z) {
      for (int a = 0; a < na; ++a) {
        double sum = 0.0;
        std::vector<double> row(nz);
        for (int z2 = 0; z2 < nz; ++z2) {
          row[z2] = rng.unit() + 0.05;
          sum += row[z2];
        }
        for (int z2 = 0; z2 < nz; ++z2) ag.prob_ref(z, a, z2) = row[z2] / sum;
      }
    }
    model.agents.push_back(std::move(ag));
  }

  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  for (long long s = 0; s < states.size(); ++s) {
    for (long long a = 0; a < actions.size(); ++a) {
      if (rng.unit() < opts.reward_density) {
        const double r = opts.signed_rewards ? 2.0 * rng.unit() - 1.0 : rng.unit();
        model.set_reward(s, a, r);
      }
    }
  }

  model.initial.stage = 0;
  model.initial.p.assign(states.size(), 0.0);
  if (opts.point_start) {
    model.initial.p[rng.below(states.size())] = 1.0;
  } else if (opts.product_start) {
    FactoredOccupancy f;
    f.stage = 0;
    for (int i = 0; i < opts.n_agents; ++i) {
      std::vector<double> mu(model.agents[i].obs_count());
      double sum = 0.0;
      for (double& m : mu) {
        m = rng.unit() + 0.05;
        sum += m;
      }
      for (double& m : mu) m /= sum;
      f.marginals.push_back(std::move(mu));
    }
    model.initial = join(f);
    model.initial.stage = 0;
  } else {
    double sum = 0.0;
    for (double& p : model.initial.p) {
      p = rng.unit() + 0.05;
      sum += p;
    }
    for (double& p : model.initial.p) p /= sum;
  }
  return model;
}

/// Two agents with observations {0,1} and actions {stay, flip}; reward 1
/// whenever the agents' observations agree, for any action. Start: point
/// mass on (0, 1), horizon 2. Optimal value 1 (flip one agent, then collect).
inline FactoredDecMdp toy_mirror_model() {
  FactoredDecMdp model;
  model.horizon = 2;
  for (int i = 0; i < 2; ++i) {
    LocalAgentModel ag;
    ag.observations = {"0", "1"};
    ag.actions = {"stay", "flip"};
    ag.transition.assign(2 * 2 * 2, 0.0);
    ag.prob_ref(0, 0, 0) = 1.0;
    ag.prob_ref(1, 0, 1) = 1.0;
    ag.prob_ref(0, 1, 1) = 1.0;
    ag.prob_ref(1, 1, 0) = 1.0;
    model.agents.push_back(std::move(ag));
  }
  for (long long s : {0ll, 3ll}) {  // (0,0) and (1,1)
    for (long long a = 0; a < 4; ++a) model.set_reward(s, a, 1.0);
  }
  model.initial.stage = 0;
  model.initial.p = {0.0, 1.0, 0.0, 0.0};  // point mass on (0, 1)
  return model;
}

/// Dense reference for advance(): full |S| x |S| matrix-vector product using
/// joint_transition directly.
inline OccupancyDistribution dense_advance(const FactoredDecMdp& model,
                                           const OccupancyDistribution& eta,
                                           const DecisionRule& rule) {
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  OccupancyDistribution out;
  out.stage = eta.stage + 1;
  out.p.assign(eta.p.size(), 0.0);
  std::vector<int> obs(model.agent_count());
  for (long long s = 0; s < states.size(); ++s) {
    if (eta.p[s] == 0.0) continue;
    states.decode(s, obs);
    const long long a = rule.joint_action(obs, actions);
    for (long long s2 = 0; s2 < states.size(); ++s2) {
      out.p[s2] += eta.p[s] * joint_transition(model, s, a, s2);
    }
  }
  return out;
}

/// Monte-Carlo policy value estimate; returns (mean, standard error).
inline std::pair<double, double> simulate_policy(const FactoredDecMdp& model,
                                                 const MarkovPolicy& pi,
                                                 int rollouts,
                                                 std::uint64_t seed) {
  SplitMix64 rng(seed);
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const int n = model.agent_count();
  std::vector<int> obs(n);

  auto sample = [&rng](const std::vector<double>& dist) {
    double u = rng.unit();
    for (std::size_t i = 0; i < dist.size(); ++i) {
      u -= dist[i];
      if (u < 0.0) return static_cast<long long>(i);
    }
    return static_cast<long long>(dist.size()) - 1;
  };

  double sum = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < rollouts; ++k) {
    long long s = sample(model.initial.p);
    double total = 0.0;
    for (int tau = 0; tau < model.horizon; ++tau) {
      states.decode(s, obs);
      const long long a = pi.rules[tau].joint_action(obs, actions);
      total += reward(model, s, a);
      long long s2 = 0;
      for (int i = 0; i < n; ++i) {
        const auto& ag = model.agents[i];
        double u = rng.unit();
        int z2 = ag.obs_count() - 1;
        for (int cand = 0; cand < ag.obs_count(); ++cand) {
          u -= ag.prob(obs[i], pi.rules[tau].action[i][obs[i]], cand);
          if (u < 0.0) {
            z2 = cand;
            break;
          }
        }
        s2 += z2 * states.stride(i);
      }
      s = s2;
    }
    sum += total;
    sum_sq += total * total;
  }
  const double mean = sum / rollouts;
  const double var = std::max(0.0, sum_sq / rollouts - mean * mean);
  return {mean, std::sqrt(var / rollouts)};
}

}  // namespace decmps::test
