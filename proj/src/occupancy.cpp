#include "decmps/occupancy.hpp"

#include <cmath>

#include "decmps/model.hpp"
#include "decmps/policy.hpp"
#include "decmps/util.hpp"

namespace decmps {

namespace {

void require_below_horizon(const FactoredDecMdp& model, int stage) {
  if (stage >= model.horizon) {
    throw HorizonError("cannot advance occupancy at stage " +
                       std::to_string(stage) + " with horizon " +
                       std::to_string(model.horizon));
  }
}

}  // namespace

OccupancyDistribution advance(const FactoredDecMdp& model,
                              const OccupancyDistribution& eta,
                              const DecisionRule& rule) {
  require_below_horizon(model, eta.stage);
  const JointSpace states = model.state_space();
  const int n = model.agent_count();

  // Local successor rows for the (observation, rule action) pairs actually
  // used at this stage; rows are sparse in most benchmark dynamics.
  std::vector<std::vector<std::vector<std::pair<int, double>>>> rows(n);
  for (int i = 0; i < n; ++i) {
    const auto& ag = model.agents[i];
    rows[i].resize(ag.obs_count());
    for (int z = 0; z < ag.obs_count(); ++z) {
      ag.row_support(z, rule.action[i][z], rows[i][z]);
    }
  }

  OccupancyDistribution out;
  out.stage = eta.stage + 1;
  out.p.assign(eta.p.size(), 0.0);

  std::vector<int> obs(n);
  // Depth-first product of the per-agent successor rows, accumulating the
  // partial joint index and probability.
  auto scatter = [&](auto&& self, int depth, long long idx, double prob) -> void {
    if (depth == n) {
      out.p[idx] += prob;
      return;
    }
    for (const auto& [z2, p] : rows[depth][obs[depth]]) {
      self(self, depth + 1, idx + z2 * states.stride(depth), prob * p);
    }
  };
  for (long long s = 0; s < states.size(); ++s) {
    const double mass = eta.p[s];
    if (mass <= 0.0) continue;
    states.decode(s, obs);
    scatter(scatter, 0, 0, mass);
  }
  return out;
}

double expected_reward(const FactoredDecMdp& model,
                       const OccupancyDistribution& eta,
                       const DecisionRule& rule) {
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const long long na = actions.size();
  std::vector<int> obs(model.agent_count());
  double total = 0.0;
  for (long long s = 0; s < states.size(); ++s) {
    const double mass = eta.p[s];
    if (mass <= 0.0) continue;
    states.decode(s, obs);
    const long long a = rule.joint_action(obs, actions);
    const auto it =
        model.reward_entries.find(static_cast<std::uint64_t>(s * na + a));
    if (it != model.reward_entries.end()) total += mass * it->second;
  }
  return total;
}

FactoredOccupancy advance_factored(const FactoredDecMdp& model,
                                   const FactoredOccupancy& feta,
                                   const DecisionRule& rule) {
  require_below_horizon(model, feta.stage);
  FactoredOccupancy out;
  out.stage = feta.stage + 1;
  out.marginals.resize(model.agent_count());
  for (int i = 0; i < model.agent_count(); ++i) {
    const auto& ag = model.agents[i];
    const auto& mu = feta.marginals[i];
    auto& nu = out.marginals[i];
    nu.assign(mu.size(), 0.0);
    for (int z = 0; z < ag.obs_count(); ++z) {
      const double mass = mu[z];
      if (mass <= 0.0) continue;
      const int a = rule.action[i][z];
      for (int z2 = 0; z2 < ag.obs_count(); ++z2) {
        const double p = ag.prob(z, a, z2);
        if (p > 0.0) nu[z2] += mass * p;
      }
    }
  }
  return out;
}

OccupancyDistribution join(const FactoredOccupancy& feta) {
  OccupancyDistribution out;
  out.stage = feta.stage;
  out.p.assign(1, 1.0);
  for (const auto& mu : feta.marginals) {
    std::vector<double> next(out.p.size() * mu.size());
    std::size_t k = 0;
    for (double acc : out.p) {
      for (double m : mu) next[k++] = acc * m;
    }
    out.p = std::move(next);
  }
  return out;
}

std::optional<FactoredOccupancy> factor_rank1(const OccupancyDistribution& eta,
                                              const FactoredDecMdp& model,
                                              double tol) {
  const JointSpace states = model.state_space();
  const int n = model.agent_count();
  FactoredOccupancy f;
  f.stage = eta.stage;
  f.marginals.resize(n);
  for (int i = 0; i < n; ++i) f.marginals[i].assign(model.agents[i].obs_count(), 0.0);

  std::vector<int> obs(n);
  for (long long s = 0; s < states.size(); ++s) {
    const double mass = eta.p[s];
    if (mass == 0.0) continue;
    states.decode(s, obs);
    for (int i = 0; i < n; ++i) f.marginals[i][obs[i]] += mass;
  }

  const OccupancyDistribution product = join(f);
  for (std::size_t s = 0; s < eta.p.size(); ++s) {
    if (std::abs(product.p[s] - eta.p[s]) > tol) return std::nullopt;
  }
  return f;
}

OccupancyKey key_of(const OccupancyDistribution& eta) {
  OccupancyKey key;
  key.stage = eta.stage;
  key.digits.reserve(eta.p.size());
  for (double p : eta.p) key.digits.push_back(round_e10(p));
  return key;
}

}  // namespace decmps
