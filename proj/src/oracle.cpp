#include "decmps/oracle.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "decmps/occupancy.hpp"
#include "decmps/util.hpp"

namespace decmps {

namespace {

long long checked_pow(long long base, long long exponent, long long cap) {
  long long total = 1;
  for (long long i = 0; i < exponent; ++i) {
    if (base != 0 && total > cap / base) return cap + 1;
    total *= base;
  }
  return total;
}

}  // namespace

CoupledDecMdp couple(const FactoredDecMdp& model) {
  if (model.agent_count() != 2) {
    throw std::invalid_argument("coupled view requires exactly 2 agents");
  }
  CoupledDecMdp c;
  c.z1 = model.agents[0].obs_count();
  c.z2 = model.agents[1].obs_count();
  c.a1 = model.agents[0].action_count();
  c.a2 = model.agents[1].action_count();
  c.horizon = model.horizon;
  c.initial = model.initial.p;
  c.transition.assign(static_cast<std::size_t>(c.ns()) * c.na() * c.ns(), 0.0);
  c.reward.assign(static_cast<std::size_t>(c.ns()) * c.na(), 0.0);
  for (int s = 0; s < c.ns(); ++s) {
    for (int a = 0; a < c.na(); ++a) {
      c.r_ref(s, a) = reward(model, s, a);
      for (int s2 = 0; s2 < c.ns(); ++s2) {
        c.p_ref(s, a, s2) = joint_transition(model, s, a, s2);
      }
    }
  }
  return c;
}

std::pair<double, MarkovPolicy> best_markov(const FactoredDecMdp& model,
                                            long long cap) {
  const RuleCount rc = rule_count(model);
  if (rc.saturated || checked_pow(rc.value, model.horizon, cap) > cap) {
    throw CapacityError("Markov policy space exceeds the oracle cap of " +
                        std::to_string(cap));
  }

  std::vector<DecisionRule> rules;
  rules.reserve(static_cast<std::size_t>(rc.value));
  RuleEnumerator enumerate(model, cap);
  DecisionRule r;
  while (enumerate.next(r)) rules.push_back(r);

  const int T = model.horizon;
  MarkovPolicy current;
  current.rules.resize(T);
  MarkovPolicy best_pi = current;
  double best = 0.0;
  bool have = false;

  auto rec = [&](auto&& self, int tau, const OccupancyDistribution& eta,
                 double acc) -> void {
    if (tau == T) {
      if (!have || acc > best) {
        best = acc;
        best_pi = current;
        have = true;
      }
      return;
    }
    for (const auto& rule : rules) {
      current.rules[tau] = rule;
      const double gained = acc + expected_reward(model, eta, rule);
      if (tau + 1 == T) {
        self(self, tau + 1, eta, gained);
      } else {
        self(self, tau + 1, advance(model, eta, rule), gained);
      }
    }
  };
  rec(rec, 0, model.initial, 0.0);
  return {best, best_pi};
}

namespace {

/// Per-stage rules of a coupled model, enumerated agent-1-major in canonical
/// order: rule index decodes to (map z1->a1, map z2->a2).
struct CoupledRules {
  int z1, z2, a1, a2;
  long long count1, count2;

  explicit CoupledRules(const CoupledDecMdp& m)
      : z1(m.z1), z2(m.z2), a1(m.a1), a2(m.a2) {
    count1 = 1;
    for (int i = 0; i < z1; ++i) count1 *= a1;
    count2 = 1;
    for (int i = 0; i < z2; ++i) count2 *= a2;
  }
  long long count() const { return count1 * count2; }

  int action1(long long rule, int z) const {
    long long part = rule / count2;
    for (int i = z1 - 1; i > z; --i) part /= a1;
    return static_cast<int>(part % a1);
  }
  int action2(long long rule, int z) const {
    long long part = rule % count2;
    for (int i = z2 - 1; i > z; --i) part /= a2;
    return static_cast<int>(part % a2);
  }
  int joint_action(long long rule, int s) const {
    const int za = s / z2;
    const int zb = s % z2;
    return action1(rule, za) * a2 + action2(rule, zb);
  }
};

}  // namespace

double best_markov_value(const CoupledDecMdp& model, long long cap) {
  const CoupledRules rules(model);
  if (checked_pow(rules.count(), model.horizon, cap) > cap) {
    throw CapacityError("Markov policy space exceeds the oracle cap of " +
                        std::to_string(cap));
  }
  const int T = model.horizon;
  const int ns = model.ns();
  double best = 0.0;
  bool have = false;

  auto rec = [&](auto&& self, int tau, const std::vector<double>& eta,
                 double acc) -> void {
    if (tau == T) {
      if (!have || acc > best) {
        best = acc;
        have = true;
      }
      return;
    }
    for (long long rule = 0; rule < rules.count(); ++rule) {
      double gained = acc;
      for (int s = 0; s < ns; ++s) {
        if (eta[s] > 0.0) gained += eta[s] * model.r(s, rules.joint_action(rule, s));
      }
      if (tau + 1 == T) {
        self(self, tau + 1, eta, gained);
      } else {
        std::vector<double> next(ns, 0.0);
        for (int s = 0; s < ns; ++s) {
          if (eta[s] <= 0.0) continue;
          const int a = rules.joint_action(rule, s);
          for (int s2 = 0; s2 < ns; ++s2) next[s2] += eta[s] * model.p(s, a, s2);
        }
        self(self, tau + 1, next, gained);
      }
    }
  };
  rec(rec, 0, model.initial, 0.0);
  return best;
}

namespace {

/// Slot layout of one agent's history-dependent policy: stage tau has
/// |Z| * (|A| * |Z|)^tau histories, identified by
/// id' = (id * |A| + a) * |Z| + z'.
struct HistorySlots {
  std::vector<long long> per_stage;  // histories per stage
  std::vector<long long> offset;     // slot offset per stage
  long long total = 0;

  HistorySlots(int z, int a, int T) {
    constexpr long long kLimit = 1ll << 40;  // far past any usable cap
    per_stage.resize(T);
    offset.resize(T);
    long long h = z;
    for (int tau = 0; tau < T; ++tau) {
      per_stage[tau] = h;
      offset[tau] = total;
      total = std::min(total + h, kLimit);
      h = h > kLimit / (static_cast<long long>(a) * z)
              ? kLimit
              : h * static_cast<long long>(a) * z;
    }
  }
};

}  // namespace

double best_history_value(const CoupledDecMdp& model, long long cap) {
  const int T = model.horizon;
  const HistorySlots slots1(model.z1, model.a1, T);
  const HistorySlots slots2(model.z2, model.a2, T);
  if (slots1.total > 63 || slots2.total > 63) {
    throw CapacityError("history policy space exceeds the oracle cap of " +
                        std::to_string(cap));
  }

  // Total policy count: a1^slots1 * a2^slots2, saturating against cap.
  long long total = checked_pow(model.a1, slots1.total, cap);
  if (total <= cap) {
    const long long part2 = checked_pow(model.a2, slots2.total, cap);
    total = (part2 > cap || total > cap / part2) ? cap + 1 : total * part2;
  }
  if (total > cap) {
    throw CapacityError("history policy space exceeds the oracle cap of " +
                        std::to_string(cap));
  }

  std::vector<int> pol1(slots1.total, 0);
  std::vector<int> pol2(slots2.total, 0);
  const int ns = model.ns();

  auto evaluate = [&]() {
    double total_reward = 0.0;
    auto rec = [&](auto&& self, int tau, int s, long long h1, long long h2,
                   double prob) -> void {
      const int act1 = pol1[slots1.offset[tau] + h1];
      const int act2 = pol2[slots2.offset[tau] + h2];
      const int a = act1 * model.a2 + act2;
      total_reward += prob * model.r(s, a);
      if (tau + 1 == T) return;
      for (int s2 = 0; s2 < ns; ++s2) {
        const double p = model.p(s, a, s2);
        if (p <= 0.0) continue;
        const long long n1 = (h1 * model.a1 + act1) * model.z1 + s2 / model.z2;
        const long long n2 = (h2 * model.a2 + act2) * model.z2 + s2 % model.z2;
        self(self, tau + 1, s2, n1, n2, prob * p);
      }
    };
    for (int s = 0; s < ns; ++s) {
      if (model.initial[s] > 0.0) {
        rec(rec, 0, s, s / model.z2, s % model.z2, model.initial[s]);
      }
    }
    return total_reward;
  };

  double best = evaluate();
  // Odometer over all slots of both agents.
  const long long n1 = slots1.total;
  const long long n2 = slots2.total;
  while (true) {
    long long i = 0;
    for (; i < n1 + n2; ++i) {
      int& digit = i < n1 ? pol1[i] : pol2[i - n1];
      const int radix = i < n1 ? model.a1 : model.a2;
      if (++digit < radix) break;
      digit = 0;
    }
    if (i == n1 + n2) break;
    const double v = evaluate();
    if (v > best) best = v;
  }
  return best;
}

double best_history(const FactoredDecMdp& model, long long cap) {
  return best_history_value(couple(model), cap);
}

CoupledDecMdp random_coupled(std::uint64_t seed, int z1, int z2, int a1, int a2,
                             int horizon, bool dependent) {
  SplitMix64 rng(seed);
  CoupledDecMdp m;
  m.z1 = z1;
  m.z2 = z2;
  m.a1 = a1;
  m.a2 = a2;
  m.horizon = horizon;
  m.transition.assign(static_cast<std::size_t>(m.ns()) * m.na() * m.ns(), 0.0);
  m.reward.assign(static_cast<std::size_t>(m.ns()) * m.na(), 0.0);

  // Agent 1 rows: p1[z1][a1][z1'], or p1[z1][z2][a1][z1'] when dependent.
  const int ctx = dependent ? z2 : 1;
  std::vector<double> p1(static_cast<std::size_t>(z1) * ctx * a1 * z1);
  for (int za = 0; za < z1; ++za) {
    for (int c = 0; c < ctx; ++c) {
      for (int a = 0; a < a1; ++a) {
        double sum = 0.0;
        for (int zb = 0; zb < z1; ++zb) {
          const double v = rng.unit() + 0.05;
          p1[((static_cast<std::size_t>(za) * ctx + c) * a1 + a) * z1 + zb] = v;
          sum += v;
        }
        for (int zb = 0; zb < z1; ++zb) {
          p1[((static_cast<std::size_t>(za) * ctx + c) * a1 + a) * z1 + zb] /= sum;
        }
      }
    }
  }
  std::vector<double> p2(static_cast<std::size_t>(z2) * a2 * z2);
  for (int za = 0; za < z2; ++za) {
    for (int a = 0; a < a2; ++a) {
      double sum = 0.0;
      for (int zb = 0; zb < z2; ++zb) {
        const double v = rng.unit() + 0.05;
        p2[(static_cast<std::size_t>(za) * a2 + a) * z2 + zb] = v;
        sum += v;
      }
      for (int zb = 0; zb < z2; ++zb) {
        p2[(static_cast<std::size_t>(za) * a2 + a) * z2 + zb] /= sum;
      }
    }
  }

  for (int s = 0; s < m.ns(); ++s) {
    const int za = s / z2;
    const int zb = s % z2;
    for (int a = 0; a < m.na(); ++a) {
      const int aa = a / a2;
      const int ab = a % a2;
      for (int s2 = 0; s2 < m.ns(); ++s2) {
        const int za2 = s2 / z2;
        const int zb2 = s2 % z2;
        const int c = dependent ? zb : 0;
        const double pa =
            p1[((static_cast<std::size_t>(za) * (dependent ? z2 : 1) + c) * a1 +
                aa) *
                   z1 +
               za2];
        const double pb = p2[(static_cast<std::size_t>(zb) * a2 + ab) * z2 + zb2];
        m.p_ref(s, a, s2) = pa * pb;
      }
      m.r_ref(s, a) = rng.unit();
    }
  }

  m.initial.assign(m.ns(), 0.0);
  double sum = 0.0;
  for (int s = 0; s < m.ns(); ++s) {
    m.initial[s] = rng.unit() + 0.05;
    sum += m.initial[s];
  }
  for (int s = 0; s < m.ns(); ++s) m.initial[s] /= sum;
  return m;
}

CoupledDecMdp memory_gap_instance() {
  CoupledDecMdp m;
  m.z1 = 2;
  m.z2 = 2;
  m.a1 = 2;
  m.a2 = 2;
  m.horizon = 2;
  m.transition.assign(static_cast<std::size_t>(m.ns()) * m.na() * m.ns(), 0.0);
  m.reward.assign(static_cast<std::size_t>(m.ns()) * m.na(), 0.0);

  // z1' copies z2, z2' resets to 0, regardless of actions.
  for (int s = 0; s < m.ns(); ++s) {
    const int zb = s % m.z2;
    for (int a = 0; a < m.na(); ++a) m.p_ref(s, a, zb * m.z2 + 0) = 1.0;
  }
  // Pay agent 2 in states (x, 0) for playing x. At stage 1 the state is
  // (first z2, 0), so the payout requires remembering that first z2, which a
  // Markov rule cannot do (it sees only z2 = 0): Markov policies collect 0.5
  // there, history policies 1.0. The same entries also pay at stage 0 in
  // state (0, 0), identically for both classes.
  for (int x = 0; x < 2; ++x) {
    const int s = x * m.z2 + 0;
    for (int a = 0; a < m.na(); ++a) {
      if (a % m.a2 == x) m.r_ref(s, a) = 1.0;
    }
  }
  // Start: z1 = 0, z2 uniform.
  m.initial.assign(m.ns(), 0.0);
  m.initial[0 * m.z2 + 0] = 0.5;
  m.initial[0 * m.z2 + 1] = 0.5;
  return m;
}

}  // namespace decmps
