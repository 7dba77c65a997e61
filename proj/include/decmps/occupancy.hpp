#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace decmps {

struct FactoredDecMdp;
struct DecisionRule;

/// Probability distribution over joint states at a given stage. This is the
/// search state of the planner: under a fixed rule sequence it evolves
/// deterministically from the initial distribution.
struct OccupancyDistribution {
  std::vector<double> p;  // indexed by joint-state linear index
  int stage = 0;
};

/// Product-form occupancy: one marginal per agent. Valid whenever the joint
/// distribution is the outer product of the marginals, which is preserved by
/// rule application when transitions factor per agent.
struct FactoredOccupancy {
  std::vector<std::vector<double>> marginals;
  int stage = 0;
};

/// Lookup key for visited occupancies: entries rounded half-even to 10
/// decimal digits, so distributions closer than the rounding grain share a
/// key while anything coarser does not.
struct OccupancyKey {
  int stage = 0;
  std::vector<std::int64_t> digits;

  bool operator==(const OccupancyKey&) const = default;
};

struct OccupancyKeyHash {
  std::size_t operator()(const OccupancyKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
      }
    };
    mix(static_cast<std::uint64_t>(k.stage));
    for (std::int64_t d : k.digits) mix(static_cast<std::uint64_t>(d));
    return static_cast<std::size_t>(h);
  }
};

/// One-step occupancy update under a decentralized decision rule:
/// out(s') = sum_s p(s, rule(s), s') * eta(s). Iterates only the support of
/// eta and the nonzero local successor entries. Deterministic: identical
/// inputs give bitwise-identical output.
OccupancyDistribution advance(const FactoredDecMdp& model,
                              const OccupancyDistribution& eta,
                              const DecisionRule& rule);

/// Expected immediate reward sum_s eta(s) * r(s, rule(s)).
double expected_reward(const FactoredDecMdp& model,
                       const OccupancyDistribution& eta,
                       const DecisionRule& rule);

/// Per-agent marginal update; join(advance_factored(f)) agrees with
/// advance(join(f)) whenever the joint occupancy is product-form.
FactoredOccupancy advance_factored(const FactoredDecMdp& model,
                                   const FactoredOccupancy& feta,
                                   const DecisionRule& rule);

/// Outer product of the marginals.
OccupancyDistribution join(const FactoredOccupancy& feta);

/// Rank-1 check: returns the per-agent marginals when eta equals their outer
/// product within tol, otherwise nullopt.
std::optional<FactoredOccupancy> factor_rank1(const OccupancyDistribution& eta,
                                              const FactoredDecMdp& model,
                                              double tol = 1e-12);

OccupancyKey key_of(const OccupancyDistribution& eta);

}  // namespace decmps
