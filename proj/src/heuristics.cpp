#include "decmps/heuristics.hpp"

#include <string>

#include "decmps/util.hpp"

namespace decmps {

MdpHeuristic build_mdp_heuristic(const FactoredDecMdp& model,
                                 long long action_cap) {
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const long long ns = states.size();
  const long long na = actions.size();
  if (na > action_cap) {
    throw CapacityError("joint action space of size " + std::to_string(na) +
                        " exceeds the cap of " + std::to_string(action_cap));
  }
  const int T = model.horizon;

  MdpHeuristic h;
  h.value.assign(T + 1, std::vector<double>(ns, 0.0));
  h.greedy.assign(T, std::vector<long long>(ns, 0));

  std::vector<int> obs(model.agent_count());
  std::vector<int> act(model.agent_count());
  for (int tau = T - 1; tau >= 0; --tau) {
    const auto& next = h.value[tau + 1];
    for (long long s = 0; s < ns; ++s) {
      states.decode(s, obs);
      double best = 0.0;
      long long best_a = 0;
      bool have = false;
      for (long long a = 0; a < na; ++a) {
        actions.decode(a, act);
        double q = reward(model, s, a);
        auto expand = [&](auto&& self, int depth, long long idx,
                          double prob) -> void {
          if (depth == model.agent_count()) {
            q += prob * next[idx];
            return;
          }
          const auto& ag = model.agents[depth];
          for (int z2 = 0; z2 < ag.obs_count(); ++z2) {
            const double p = ag.prob(obs[depth], act[depth], z2);
            if (p > 0.0) {
              self(self, depth + 1, idx + z2 * states.stride(depth), prob * p);
            }
          }
        };
        expand(expand, 0, 0, 1.0);
        if (!have || q > best) {
          best = q;
          best_a = a;
          have = true;
        }
      }
      h.value[tau][s] = best;
      h.greedy[tau][s] = best_a;
    }
  }
  return h;
}

BoundStore::BoundStore(const FactoredDecMdp& model, MdpHeuristic heuristic,
                       MarkovPolicy incumbent)
    : mdp_(std::move(heuristic)),
      incumbent_(std::move(incumbent)),
      horizon_(model.horizon) {
  incumbent_values_ = evaluate_policy(model, incumbent_);
  stage_nodes_.resize(horizon_);
}

double BoundStore::mdp_default(int tau, const OccupancyDistribution& eta) const {
  if (tau >= horizon_) return 0.0;
  const auto& v = mdp_.value[tau];
  double total = 0.0;
  for (std::size_t s = 0; s < eta.p.size(); ++s) total += eta.p[s] * v[s];
  return total;
}

double BoundStore::ub_value(int tau, const OccupancyDistribution& eta) const {
  if (tau >= horizon_) return 0.0;
  const Node* n = node(tau, key_of(eta));
  if (n != nullptr && n->has_backup) return n->backup_value;
  return mdp_default(tau, eta);
}

void BoundStore::note_backup(int tau, const OccupancyDistribution& eta,
                             double objective) {
  Node& n = node_for_update(tau, eta);
  if (!n.has_backup || objective < n.backup_value) {
    n.backup_value = objective;
    n.has_backup = true;
  }
}

void BoundStore::ub_update(int tau, const OccupancyDistribution& eta,
                           const DecisionRule& rule, double new_q) {
  Node& n = node_for_update(tau, eta);
  auto [it, inserted] = n.stored.try_emplace(rule, new_q);
  if (inserted) {
    if (++entries_ > entry_cap) {
      throw CapacityError("bound store exceeded " + std::to_string(entry_cap) +
                          " stored rule entries");
    }
  } else if (new_q < it->second) {
    it->second = new_q;
  }
}

double BoundStore::lb_value(int tau, const OccupancyDistribution& eta) const {
  if (tau >= horizon_) return 0.0;
  return value_at(incumbent_values_, tau, eta);
}

bool BoundStore::lb_update(const FactoredDecMdp& model,
                           const MarkovPolicy& candidate) {
  const StateValueTable table = evaluate_policy(model, candidate);
  const double current = value_at(incumbent_values_, 0, model.initial);
  const double proposed = value_at(table, 0, model.initial);
  if (proposed > current) {
    incumbent_ = candidate;
    incumbent_values_ = table;
    return true;
  }
  return false;
}

const BoundStore::Node* BoundStore::node(int tau, const OccupancyKey& key) const {
  const auto& nodes = stage_nodes_[tau];
  const auto it = nodes.find(key);
  return it == nodes.end() ? nullptr : &it->second;
}

BoundStore::Node& BoundStore::node_for_update(int tau,
                                              const OccupancyDistribution& eta) {
  return stage_nodes_[tau][key_of(eta)];
}

}  // namespace decmps
