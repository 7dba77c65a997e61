#include "decmps/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace decmps {

JointSpace::JointSpace(std::vector<int> radix) : radix_(std::move(radix)) {
  stride_.assign(radix_.size(), 1);
  for (int i = static_cast<int>(radix_.size()) - 2; i >= 0; --i) {
    stride_[i] = stride_[i + 1] * radix_[i + 1];
  }
  size_ = 1;
  for (int r : radix_) size_ *= r;
}

long long JointSpace::encode(std::span<const int> digits) const {
  long long idx = 0;
  for (std::size_t i = 0; i < radix_.size(); ++i) idx += digits[i] * stride_[i];
  return idx;
}

void JointSpace::decode(long long index, std::span<int> digits) const {
  for (std::size_t i = 0; i < radix_.size(); ++i) {
    digits[i] = static_cast<int>(index / stride_[i]);
    index %= stride_[i];
  }
}

int JointSpace::digit(long long index, int pos) const {
  return static_cast<int>((index / stride_[pos]) % radix_[pos]);
}

void LocalAgentModel::row_support(int z, int a,
                                  std::vector<std::pair<int, double>>& out) const {
  const int nz = obs_count();
  for (int z2 = 0; z2 < nz; ++z2) {
    const double p = prob(z, a, z2);
    if (p > 0.0) out.emplace_back(z2, p);
  }
}

JointSpace FactoredDecMdp::state_space() const {
  std::vector<int> radix;
  radix.reserve(agents.size());
  for (const auto& ag : agents) radix.push_back(ag.obs_count());
  return JointSpace(std::move(radix));
}

JointSpace FactoredDecMdp::action_space() const {
  std::vector<int> radix;
  radix.reserve(agents.size());
  for (const auto& ag : agents) radix.push_back(ag.action_count());
  return JointSpace(std::move(radix));
}

void FactoredDecMdp::set_reward(long long s, long long a, double value) {
  const long long na = action_space().size();
  reward_entries[static_cast<std::uint64_t>(s * na + a)] = value;
}

namespace {

constexpr double kProbTol = 1e-9;

void check_range(long long v, long long n, const char* what) {
  if (v < 0 || v >= n) {
    throw std::out_of_range(std::string(what) + " index " + std::to_string(v) +
                            " outside [0, " + std::to_string(n) + ")");
  }
}

}  // namespace

ValidationReport validate(const FactoredDecMdp& model) {
  ValidationReport report;
  auto flag = [&report](std::string where, std::string message) {
    report.issues.push_back({std::move(where), std::move(message)});
  };

  if (model.agent_count() < 2) {
    flag("agents", "model requires at least 2 agents, has " +
                       std::to_string(model.agent_count()));
  }
  if (model.horizon < 1) {
    flag("horizon", "horizon must be positive, is " + std::to_string(model.horizon));
  }

  for (int i = 0; i < model.agent_count(); ++i) {
    const auto& ag = model.agents[i];
    const std::string who = "agent " + std::to_string(i);
    if (ag.observations.empty()) flag(who, "empty observation set");
    if (ag.actions.empty()) flag(who, "empty action set");
    std::set<std::string> seen;
    for (const auto& id : ag.observations) {
      if (!seen.insert(id).second) flag(who, "duplicate observation id '" + id + "'");
    }
    seen.clear();
    for (const auto& id : ag.actions) {
      if (!seen.insert(id).second) flag(who, "duplicate action id '" + id + "'");
    }
    if (ag.transition.size() != static_cast<std::size_t>(ag.obs_count()) *
                                    ag.action_count() * ag.obs_count()) {
      flag(who, "transition table has wrong size");
      continue;
    }
    for (int z = 0; z < ag.obs_count(); ++z) {
      for (int a = 0; a < ag.action_count(); ++a) {
        double sum = 0.0;
        bool in_range = true;
        for (int z2 = 0; z2 < ag.obs_count(); ++z2) {
          const double p = ag.prob(z, a, z2);
          if (p < 0.0 || p > 1.0) in_range = false;
          sum += p;
        }
        const std::string row = who + " row (z=" + ag.observations[z] +
                                ", a=" + ag.actions[a] + ")";
        if (!in_range) flag(row, "transition probability outside [0,1]");
        if (std::abs(sum - 1.0) > kProbTol) {
          flag(row, "transition row sums to " + std::to_string(sum));
        }
      }
    }
  }
  if (!report.ok()) return report;  // shape errors make the rest unreliable

  const long long ns = model.state_space().size();
  const long long na = model.action_space().size();
  for (const auto& [key, value] : model.reward_entries) {
    const long long s = static_cast<long long>(key) / na;
    const long long a = static_cast<long long>(key) % na;
    if (s < 0 || s >= ns) {
      flag("reward", "entry references invalid joint state " + std::to_string(s));
    }
    if (a < 0 || a >= na) {
      flag("reward", "entry references invalid joint action " + std::to_string(a));
    }
    (void)value;
  }

  if (static_cast<long long>(model.initial.p.size()) != ns) {
    flag("initial occupancy", "length " + std::to_string(model.initial.p.size()) +
                                  " does not match |S| = " + std::to_string(ns));
  } else {
    double sum = 0.0;
    bool in_range = true;
    for (double p : model.initial.p) {
      if (p < 0.0 || p > 1.0) in_range = false;
      sum += p;
    }
    if (!in_range) flag("initial occupancy", "entry outside [0,1]");
    if (std::abs(sum - 1.0) > kProbTol) {
      flag("initial occupancy", "sums to " + std::to_string(sum));
    }
  }
  if (model.initial.stage != 0) {
    flag("initial occupancy", "stage must be 0");
  }
  return report;
}

double joint_transition(const FactoredDecMdp& model, long long s, long long a,
                        long long s2) {
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  check_range(s, states.size(), "state");
  check_range(s2, states.size(), "state");
  check_range(a, actions.size(), "action");
  double p = 1.0;
  for (int i = 0; i < model.agent_count(); ++i) {
    p *= model.agents[i].prob(states.digit(s, i), actions.digit(a, i),
                              states.digit(s2, i));
  }
  return p;
}

double reward(const FactoredDecMdp& model, long long s, long long a) {
  const long long ns = model.state_space().size();
  const long long na = model.action_space().size();
  check_range(s, ns, "state");
  check_range(a, na, "action");
  const auto it = model.reward_entries.find(static_cast<std::uint64_t>(s * na + a));
  return it == model.reward_entries.end() ? 0.0 : it->second;
}

}  // namespace decmps
