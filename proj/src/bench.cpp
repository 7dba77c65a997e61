#include "decmps/bench.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "decmps/util.hpp"

namespace decmps {

namespace {

LocalAgentModel recycling_agent(const RecyclingParams& p) {
  LocalAgentModel ag;
  ag.observations = {"high", "low"};
  ag.actions = {"search", "wait", "recharge"};
  ag.transition.assign(2 * 3 * 2, 0.0);
  // search
  ag.prob_ref(0, 0, 0) = p.alpha;
  ag.prob_ref(0, 0, 1) = 1.0 - p.alpha;
  ag.prob_ref(1, 0, 1) = p.beta;
  ag.prob_ref(1, 0, 0) = 1.0 - p.beta;  // rescued back to high
  // wait keeps the battery level
  ag.prob_ref(0, 1, 0) = 1.0;
  ag.prob_ref(1, 1, 1) = 1.0;
  // recharge
  ag.prob_ref(0, 2, 0) = 1.0;
  ag.prob_ref(1, 2, 0) = 1.0;
  return ag;
}

double local_reward(const RecyclingParams& p, int z, int a) {
  switch (a) {
    case 0: return z == 0 ? p.reward_search_high : p.reward_search_low;
    case 1: return p.reward_wait;
    default: return p.reward_recharge;
  }
}

void check_valid(const FactoredDecMdp& model, const char* what) {
  const ValidationReport report = validate(model);
  if (!report.ok()) {
    throw std::invalid_argument(std::string(what) + ": " +
                                report.issues[0].where + ": " +
                                report.issues[0].message);
  }
}

FactoredDecMdp team_base(int n_agents, const RecyclingParams& params) {
  FactoredDecMdp model;
  model.horizon = params.horizon;
  for (int i = 0; i < n_agents; ++i) model.agents.push_back(recycling_agent(params));

  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  std::vector<int> obs(n_agents);
  std::vector<int> act(n_agents);
  for (long long s = 0; s < states.size(); ++s) {
    states.decode(s, obs);
    for (long long a = 0; a < actions.size(); ++a) {
      actions.decode(a, act);
      double r = 0.0;
      for (int i = 0; i < n_agents; ++i) r += local_reward(params, obs[i], act[i]);
      if (r != 0.0) model.set_reward(s, a, r);
    }
  }

  model.initial.stage = 0;
  model.initial.p.assign(states.size(), 0.0);
  model.initial.p[0] = 1.0;  // every battery high
  return model;
}

}  // namespace

FactoredDecMdp gen_recycling(const RecyclingParams& params) {
  FactoredDecMdp model = team_base(2, params);

  // Bonus when both agents search at once.
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const long long both_search = 0;  // action index ("search", "search")
  for (long long s = 0; s < states.size(); ++s) {
    const double base = reward(model, s, both_search);
    model.set_reward(s, both_search, base + params.both_search_bonus);
  }
  (void)actions;
  check_valid(model, "gen_recycling");
  return model;
}

FactoredDecMdp gen_random_team(int n_agents, int klass, std::uint64_t seed,
                               const RecyclingParams& params) {
  if (n_agents < 2) throw std::invalid_argument("gen_random_team: n_agents < 2");
  if (klass < 0 || klass > 3) {
    throw std::invalid_argument("gen_random_team: class must be in {0,1,2,3}");
  }
  FactoredDecMdp model = team_base(n_agents, params);

  const long long ns = model.state_space().size();
  const long long na = model.action_space().size();
  const long long e_max = ns * na;
  const long long lo = klass * e_max / 4;
  const long long hi = (klass + 1) * e_max / 4;

  SplitMix64 rng(seed);
  const long long e = hi > lo ? lo + static_cast<long long>(rng.below(hi - lo)) : lo;

  // e distinct (s, a) pairs by partial Fisher-Yates over all cell indices.
  std::vector<long long> cells(e_max);
  std::iota(cells.begin(), cells.end(), 0);
  for (long long j = 0; j < e; ++j) {
    const long long k = j + static_cast<long long>(rng.below(e_max - j));
    std::swap(cells[j], cells[k]);
    const long long s = cells[j] / na;
    const long long a = cells[j] % na;
    model.set_reward(s, a, reward(model, s, a) + rng.unit());
  }
  check_valid(model, "gen_random_team");
  return model;
}

FactoredDecMdp gen_meeting_grid(const MeetingGridParams& params) {
  const int side = params.side;
  if (side < 2) throw std::invalid_argument("gen_meeting_grid: side must be >= 2");
  if (params.slip < 0.0 || params.slip >= 1.0) {
    throw std::invalid_argument("gen_meeting_grid: slip must be in [0, 1)");
  }
  const int cells = side * side;

  LocalAgentModel agent;
  agent.observations.reserve(cells);
  for (int c = 0; c < cells; ++c) agent.observations.push_back("c" + std::to_string(c));
  agent.actions = {"north", "south", "west", "east", "stay"};
  agent.transition.assign(static_cast<std::size_t>(cells) * 5 * cells, 0.0);
  const int drow[5] = {-1, 1, 0, 0, 0};
  const int dcol[5] = {0, 0, -1, 1, 0};
  for (int c = 0; c < cells; ++c) {
    const int row = c / side;
    const int col = c % side;
    for (int a = 0; a < 5; ++a) {
      const int r2 = row + drow[a];
      const int c2 = col + dcol[a];
      if (r2 < 0 || r2 >= side || c2 < 0 || c2 >= side || (r2 == row && c2 == col)) {
        agent.prob_ref(c, a, c) = 1.0;  // wall or stay
      } else {
        agent.prob_ref(c, a, r2 * side + c2) = 1.0 - params.slip;
        agent.prob_ref(c, a, c) += params.slip;
      }
    }
  }

  FactoredDecMdp model;
  model.horizon = params.horizon;
  model.agents = {agent, agent};

  // r(s, a) = probability that both agents land in the same cell.
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  for (long long s = 0; s < states.size(); ++s) {
    const int z1 = states.digit(s, 0);
    const int z2 = states.digit(s, 1);
    for (long long a = 0; a < actions.size(); ++a) {
      const int a1 = actions.digit(a, 0);
      const int a2 = actions.digit(a, 1);
      double meet = 0.0;
      for (int c = 0; c < cells; ++c) {
        const double p1 = agent.prob(z1, a1, c);
        if (p1 > 0.0) meet += p1 * agent.prob(z2, a2, c);
      }
      if (meet > 0.0) model.set_reward(s, a, meet);
    }
  }

  const int start1 = params.start1 < 0 ? 0 : params.start1;
  const int start2 = params.start2 < 0 ? cells - 1 : params.start2;
  if (start1 >= cells || start2 >= cells) {
    throw std::invalid_argument("gen_meeting_grid: start cell out of range");
  }
  model.initial.stage = 0;
  model.initial.p.assign(states.size(), 0.0);
  model.initial.p[static_cast<long long>(start1) * cells + start2] = 1.0;
  check_valid(model, "gen_meeting_grid");
  return model;
}

FactoredDecMdp gen_meeting_grid(int side, double slip) {
  MeetingGridParams params;
  params.side = side;
  params.slip = slip;
  return gen_meeting_grid(params);
}

}  // namespace decmps
