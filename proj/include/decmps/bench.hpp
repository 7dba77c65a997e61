#pragma once

#include <cstdint>

#include "decmps/model.hpp"

namespace decmps {

/// Battery-maintenance robots: two observations (high, low charge), three
/// actions (search, wait, recharge). Searching risks draining the battery;
/// searching on low risks a rescue back to high, priced into the low-search
/// reward. Every number is a parameter; defaults are conventional, not
/// calibrated to any published table.
struct RecyclingParams {
  double alpha = 0.8;  // P(stay high | search from high)
  double beta = 0.8;   // P(stay low | search from low); 1 - beta is a rescue
  double reward_search_high = 2.0;
  double reward_search_low = -3.0;
  double reward_wait = 1.0;
  double reward_recharge = 0.0;
  double both_search_bonus = 2.0;  // added when every agent searches
  int horizon = 10;
};

/// Two-agent coupled instance: |Z^i| = 2, |A^i| = 3, so |S| = 4 and |A| = 9.
/// Reward is the sum of local action rewards plus the bonus when both
/// search. Both agents start with a high battery.
FactoredDecMdp gen_recycling(const RecyclingParams& params = {});

/// n independent copies of the local recycling robot, base reward equal to
/// the sum of local rewards, plus e interaction events: distinct (s, a)
/// pairs whose reward is increased by a uniform draw from [0, 1). The event
/// count e is uniform in the quartile band [k*e_max/4, (k+1)*e_max/4) with
/// e_max = |S|*|A|. Bit-exact reproducible from the seed.
FactoredDecMdp gen_random_team(int n_agents, int klass, std::uint64_t seed,
                               const RecyclingParams& params = {});

struct MeetingGridParams {
  int side = 3;
  double slip = 0.1;   // failed moves stay in place
  int horizon = 10;
  int start1 = -1;     // cell index; -1 = top-left corner
  int start2 = -1;     // cell index; -1 = bottom-right corner
};

/// Two agents on a side x side grid, actions {north, south, west, east,
/// stay}. Moves into walls stay; other moves succeed with probability
/// 1 - slip. The reward of (s, a) is the probability that the agents are
/// co-located after the transition, so each step spent together pays 1 in
/// expectation.
FactoredDecMdp gen_meeting_grid(const MeetingGridParams& params);
FactoredDecMdp gen_meeting_grid(int side, double slip);

}  // namespace decmps
