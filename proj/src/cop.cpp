#include "decmps/cop.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "decmps/util.hpp"

namespace decmps {

namespace {

/// q of a rule against the relaxation tail: immediate expected reward plus
/// the advanced occupancy dotted with the stage-(tau+1) relaxation values.
double relaxation_q(const FactoredDecMdp& model, const MdpHeuristic& h, int tau,
                    const OccupancyDistribution& eta, const DecisionRule& rule) {
  double q = expected_reward(model, eta, rule);
  const OccupancyDistribution next = advance(model, eta, rule);
  const auto& v = h.value[tau + 1];
  for (std::size_t s = 0; s < next.p.size(); ++s) q += next.p[s] * v[s];
  return q;
}

/// Per-agent mask of observations with positive occupancy mass.
std::vector<std::vector<bool>> support_mask(const FactoredDecMdp& model,
                                            const OccupancyDistribution& eta) {
  const JointSpace states = model.state_space();
  std::vector<std::vector<bool>> mask(model.agent_count());
  for (int i = 0; i < model.agent_count(); ++i) {
    mask[i].assign(model.agents[i].obs_count(), false);
  }
  std::vector<int> obs(model.agent_count());
  for (long long s = 0; s < states.size(); ++s) {
    if (eta.p[s] <= 0.0) continue;
    states.decode(s, obs);
    for (int i = 0; i < model.agent_count(); ++i) mask[i][obs[i]] = true;
  }
  return mask;
}

/// Rules that differ only on zero-mass observations have identical values at
/// this occupancy, and stored rules always use action 0 there; looking up the
/// zero-filled form applies a stored bound to its whole equivalence class.
DecisionRule zero_filled(const DecisionRule& rule,
                         const std::vector<std::vector<bool>>& mask) {
  DecisionRule out = rule;
  for (std::size_t i = 0; i < out.action.size(); ++i) {
    for (std::size_t z = 0; z < out.action[i].size(); ++z) {
      if (!mask[i][z]) out.action[i][z] = 0;
    }
  }
  return out;
}

double backup_score(const FactoredDecMdp& model, const BoundStore& store,
                    int tau, const OccupancyDistribution& eta,
                    const OccupancyKey& key,
                    const std::vector<std::vector<bool>>& mask,
                    const DecisionRule& rule) {
  if (const BoundStore::Node* n = store.node(tau, key)) {
    const auto it = n->stored.find(zero_filled(rule, mask));
    if (it != n->stored.end()) return it->second;
  }
  return relaxation_q(model, store.heuristic(), tau, eta, rule);
}

/// Branch-and-bound state shared by both search phases. Variables with zero
/// mass are excluded from search and filled with action 0 afterwards; the
/// node bound is the sum over state constraints of the best entry consistent
/// with the partial assignment, plus the best still-consistent correction
/// clamped at 0. Bounds and leaf values are summed freshly in fixed state
/// order, so a node bound never drops below any leaf value in its subtree.
class CopSearch {
 public:
  explicit CopSearch(const CopProblem& p) : p_(p), aspace_(p.act_radix) {
    n_ = static_cast<int>(p.obs_radix.size());
    na_ = aspace_.size();
    adig_.assign(na_, std::vector<int>(n_));
    for (long long a = 0; a < na_; ++a) {
      for (int i = 0; i < n_; ++i) adig_[a][i] = aspace_.digit(a, i);
    }

    var_id_.resize(n_);
    int next_id = 0;
    for (int i = 0; i < n_; ++i) {
      var_id_[i].resize(p.obs_radix[i]);
      for (int z = 0; z < p.obs_radix[i]; ++z) var_id_[i][z] = next_id++;
    }
    nvars_ = next_id;
    assert(nvars_ == static_cast<int>(p.variables.size()));

    const JointSpace sspace{std::vector<int>(p.obs_radix)};
    const int ns = static_cast<int>(p.states.size());
    scope_.assign(ns, std::vector<int>(n_));
    weighted_.assign(ns, {});
    states_of_var_.assign(nvars_, {});
    std::vector<int> obs(n_);
    for (int k = 0; k < ns; ++k) {
      const auto& sc = p.states[k];
      sspace.decode(sc.state, obs);
      weighted_[k].resize(na_);
      for (long long a = 0; a < na_; ++a) weighted_[k][a] = sc.weight * sc.table[a];
      for (int i = 0; i < n_; ++i) {
        scope_[k][i] = var_id_[i][obs[i]];
        states_of_var_[scope_[k][i]].push_back(k);
      }
    }

    searched_.clear();
    for (int v = 0; v < nvars_; ++v) {
      if (!states_of_var_[v].empty()) searched_.push_back(v);
    }
  }

  CopSolution run() {
    CopSolution sol;

    // Phase 1: optimum value. Variables by decreasing mass, values by
    // decreasing restricted bound.
    std::vector<int> order = searched_;
    std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
      return p_.variables[a].mass > p_.variables[b].mass;
    });
    reset_state();
    best_ = 0.0;
    have_best_ = false;
    search_value(order, 0);

    // Phase 2: canonical-first argmax anchored at the optimum. Variables and
    // values in canonical order; the first leaf reaching the optimum is the
    // canonically smallest maximizer.
    reset_state();
    found_ = false;
    search_argmax(searched_, 0);
    assert(found_);

    sol.rule.action.resize(n_);
    for (int i = 0; i < n_; ++i) {
      sol.rule.action[i].assign(p_.obs_radix[i], 0);
      for (int z = 0; z < p_.obs_radix[i]; ++z) {
        const int a = asg_[var_id_[i][z]];
        sol.rule.action[i][z] = a < 0 ? 0 : a;
      }
    }
    sol.objective = best_;
    sol.nodes = nodes_;
    sol.proved = true;
    return sol;
  }

 private:
  void reset_state() {
    asg_.assign(nvars_, -1);
    cur_max_.assign(p_.states.size(), 0.0);
    for (std::size_t k = 0; k < p_.states.size(); ++k) {
      cur_max_[k] = restricted_max(static_cast<int>(k));
    }
    alive_.clear();
    for (std::size_t c = 0; c < p_.corrections.size(); ++c) {
      if (consistent_with_zero_fill(p_.corrections[c].rule)) {
        alive_.push_back(static_cast<int>(c));
      }
    }
    alive_count_ = alive_.size();
  }

  /// A correction can only ever match if its rule uses action 0 on every
  /// unsearched (zero-mass) variable, since those are filled with 0.
  bool consistent_with_zero_fill(const DecisionRule& rule) const {
    for (int i = 0; i < n_; ++i) {
      for (int z = 0; z < p_.obs_radix[i]; ++z) {
        if (states_of_var_[var_id_[i][z]].empty() && rule.action[i][z] != 0) {
          return false;
        }
      }
    }
    return true;
  }

  double restricted_max(int k) const {
    double best = 0.0;
    bool have = false;
    const auto& w = weighted_[k];
    for (long long a = 0; a < na_; ++a) {
      bool ok = true;
      for (int i = 0; i < n_; ++i) {
        const int v = asg_[scope_[k][i]];
        if (v >= 0 && v != adig_[a][i]) {
          ok = false;
          break;
        }
      }
      if (ok && (!have || w[a] > best)) {
        best = w[a];
        have = true;
      }
    }
    return best;
  }

  /// Fresh sum in fixed state order plus the correction headroom.
  double bound() const {
    double total = 0.0;
    for (double m : cur_max_) total += m;
    double g = 0.0;
    for (std::size_t j = 0; j < alive_count_; ++j) {
      g = std::max(g, p_.corrections[alive_[j]].g);
    }
    return total + g;
  }

  double leaf_value() const {
    for (std::size_t j = 0; j < alive_count_; ++j) {
      const auto& corr = p_.corrections[alive_[j]];
      if (matches(corr.rule)) return corr.q;  // at most one full match
    }
    double total = 0.0;
    for (std::size_t k = 0; k < p_.states.size(); ++k) {
      long long a = 0;
      for (int i = 0; i < n_; ++i) {
        a += asg_[scope_[k][i]] * aspace_.stride(i);
      }
      total += weighted_[k][a];
    }
    return total;
  }

  bool matches(const DecisionRule& rule) const {
    for (int i = 0; i < n_; ++i) {
      for (int z = 0; z < p_.obs_radix[i]; ++z) {
        const int v = asg_[var_id_[i][z]];
        if (rule.action[i][z] != (v < 0 ? 0 : v)) return false;
      }
    }
    return true;
  }

  struct Undo {
    std::vector<double> maxes;     // previous cur_max of affected states
    std::size_t alive_count = 0;   // previous live prefix length
  };

  // Corrections live in the prefix alive_[0, alive_count_); filtering swaps
  // survivors forward and shrinks the count, so restoring the count restores
  // the set.
  void assign(int var, int agent, int action, Undo& undo) {
    asg_[var] = action;
    undo.maxes.clear();
    for (int k : states_of_var_[var]) {
      undo.maxes.push_back(cur_max_[k]);
      cur_max_[k] = restricted_max(k);
    }
    undo.alive_count = alive_count_;
    const int obs = p_.variables[var].obs;
    std::size_t kept = 0;
    for (std::size_t j = 0; j < alive_count_; ++j) {
      if (p_.corrections[alive_[j]].rule.action[agent][obs] == action) {
        std::swap(alive_[kept++], alive_[j]);
      }
    }
    alive_count_ = kept;
  }

  void unassign(int var, const Undo& undo) {
    asg_[var] = -1;
    std::size_t j = 0;
    for (int k : states_of_var_[var]) cur_max_[k] = undo.maxes[j++];
    alive_count_ = undo.alive_count;
  }

  void search_value(const std::vector<int>& order, int depth) {
    ++nodes_;
    if (depth == static_cast<int>(order.size())) {
      const double v = leaf_value();
      if (!have_best_ || v > best_) {
        best_ = v;
        have_best_ = true;
      }
      return;
    }
    const int var = order[depth];
    const int agent = p_.variables[var].agent;
    const int domain = p_.act_radix[agent];

    // Try promising actions first: rank by the restricted bound over the
    // states this variable touches.
    std::vector<std::pair<double, int>> ranked(domain);
    Undo undo;
    for (int a = 0; a < domain; ++a) {
      assign(var, agent, a, undo);
      double local = 0.0;
      for (int k : states_of_var_[var]) local += cur_max_[k];
      ranked[a] = {-local, a};
      unassign(var, undo);
    }
    std::stable_sort(ranked.begin(), ranked.end());

    for (const auto& [neg, a] : ranked) {
      (void)neg;
      assign(var, agent, a, undo);
      if (!have_best_ || bound() > best_) search_value(order, depth + 1);
      unassign(var, undo);
    }
  }

  void search_argmax(const std::vector<int>& order, int depth) {
    ++nodes_;
    if (depth == static_cast<int>(order.size())) {
      if (leaf_value() >= best_) found_ = true;
      return;
    }
    const int var = order[depth];
    const int agent = p_.variables[var].agent;
    const double slack = 1e-12 * (1.0 + std::abs(best_));
    Undo undo;
    for (int a = 0; a < p_.act_radix[agent]; ++a) {
      assign(var, agent, a, undo);
      if (bound() >= best_ - slack) {
        search_argmax(order, depth + 1);
        if (found_) return;  // leave the assignment in place
      }
      unassign(var, undo);
    }
  }

  const CopProblem& p_;
  JointSpace aspace_;
  int n_ = 0;
  long long na_ = 0;
  int nvars_ = 0;
  std::vector<std::vector<int>> adig_;
  std::vector<std::vector<int>> var_id_;
  std::vector<std::vector<int>> scope_;
  std::vector<std::vector<double>> weighted_;
  std::vector<std::vector<int>> states_of_var_;
  std::vector<int> searched_;

  std::vector<int> asg_;
  std::vector<double> cur_max_;
  std::vector<int> alive_;
  std::size_t alive_count_ = 0;

  double best_ = 0.0;
  bool have_best_ = false;
  bool found_ = false;
  long long nodes_ = 0;
};

}  // namespace

CopProblem build_backup_cop(const FactoredDecMdp& model, const BoundStore& store,
                            int tau, const OccupancyDistribution& eta) {
  if (tau >= model.horizon) {
    throw HorizonError("cannot build a backup at stage " + std::to_string(tau) +
                       " with horizon " + std::to_string(model.horizon));
  }
  assert(eta.stage == tau);
  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const long long na = actions.size();
  const int n = model.agent_count();
  const auto& h = store.heuristic();

  CopProblem p;
  for (const auto& ag : model.agents) {
    p.obs_radix.push_back(ag.obs_count());
    p.act_radix.push_back(ag.action_count());
  }

  std::vector<double> marginal_mass;
  std::vector<int> obs(n);
  std::vector<int> act(n);
  for (int i = 0; i < n; ++i) {
    for (int z = 0; z < model.agents[i].obs_count(); ++z) {
      p.variables.push_back({i, z, 0.0});
    }
  }
  std::vector<int> var_base(n, 0);
  for (int i = 1; i < n; ++i) {
    var_base[i] = var_base[i - 1] + model.agents[i - 1].obs_count();
  }

  for (long long s = 0; s < states.size(); ++s) {
    const double mass = eta.p[s];
    if (mass <= 0.0) continue;
    states.decode(s, obs);
    for (int i = 0; i < n; ++i) p.variables[var_base[i] + obs[i]].mass += mass;

    CopStateConstraint sc;
    sc.state = s;
    sc.weight = mass;
    sc.table.resize(na);
    for (long long a = 0; a < na; ++a) {
      actions.decode(a, act);
      double c = reward(model, s, a);
      auto expand = [&](auto&& self, int depth, long long idx, double prob) -> void {
        if (depth == n) {
          c += prob * h.value[tau + 1][idx];
          return;
        }
        const auto& ag = model.agents[depth];
        for (int z2 = 0; z2 < ag.obs_count(); ++z2) {
          const double pr = ag.prob(obs[depth], act[depth], z2);
          if (pr > 0.0) self(self, depth + 1, idx + z2 * states.stride(depth), prob * pr);
        }
      };
      expand(expand, 0, 0, 1.0);
      sc.table[a] = c;
    }
    p.states.push_back(std::move(sc));
  }

  if (const BoundStore::Node* node = store.node(tau, key_of(eta))) {
    for (const auto& [rule, stored_q] : node->stored) {
      const double g = stored_q - relaxation_q(model, h, tau, eta, rule);
      p.corrections.push_back({rule, stored_q, g});
    }
  }
  return p;
}

CopSolution solve_cop(const CopProblem& problem) {
  return CopSearch(problem).run();
}

std::string dump_cop(const CopProblem& problem) {
  std::string out;
  char buf[128];
  auto line = [&out, &buf](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
    out += '\n';
  };
  for (std::size_t v = 0; v < problem.variables.size(); ++v) {
    const auto& var = problem.variables[v];
    line("var\t%zu\tagent\t%d\tobs\t%d\tmass\t%.17g", v, var.agent, var.obs,
         var.mass);
  }
  for (const auto& sc : problem.states) {
    for (std::size_t a = 0; a < sc.table.size(); ++a) {
      line("c\t%lld\t%zu\t%.17g\t%.17g", sc.state, a, sc.weight, sc.table[a]);
    }
  }
  for (std::size_t c = 0; c < problem.corrections.size(); ++c) {
    std::string digits;
    for (const auto& per_agent : problem.corrections[c].rule.action) {
      for (int a : per_agent) {
        digits += std::to_string(a);
        digits += ' ';
      }
    }
    if (!digits.empty()) digits.pop_back();
    line("g\t%zu\t%.17g\t%.17g\t%s", c, problem.corrections[c].q,
         problem.corrections[c].g, digits.c_str());
  }
  return out;
}

std::pair<DecisionRule, double> exhaustive_backup(const FactoredDecMdp& model,
                                                  const BoundStore& store,
                                                  int tau,
                                                  const OccupancyDistribution& eta,
                                                  long long enumeration_cap) {
  if (tau >= model.horizon) {
    throw HorizonError("cannot back up at stage " + std::to_string(tau) +
                       " with horizon " + std::to_string(model.horizon));
  }
  const OccupancyKey key = key_of(eta);
  const auto mask = support_mask(model, eta);
  RuleEnumerator enumerate(model, enumeration_cap);
  DecisionRule rule;
  DecisionRule best_rule;
  double best = 0.0;
  bool have = false;
  while (enumerate.next(rule)) {
    const double score = backup_score(model, store, tau, eta, key, mask, rule);
    if (!have || score > best) {
      best = score;
      best_rule = rule;
      have = true;
    }
  }
  return {best_rule, best};
}

}  // namespace decmps
