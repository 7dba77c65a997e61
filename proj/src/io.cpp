#include "decmps/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace decmps {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

struct Token {
  std::string text;
  int line;
  int col;
};

/// Comment-stripped, tokenized lines; blank lines skipped.
std::vector<std::vector<Token>> tokenize(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                       : eol - pos);
    ++line_no;
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < raw.size()) {
      if (raw[i] == '#') break;
      if (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r') {
        ++i;
        continue;
      }
      const std::size_t start = i;
      while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t' &&
             raw[i] != '\r' && raw[i] != '#') {
        ++i;
      }
      tokens.push_back({std::string(raw.substr(start, i - start)), line_no,
                        static_cast<int>(start) + 1});
    }
    if (!tokens.empty()) lines.push_back(std::move(tokens));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return lines;
}

double parse_real(const Token& t) {
  const char* begin = t.text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + t.text.size()) {
    throw ParseError(t.line, t.col, "expected a number, got '" + t.text + "'");
  }
  return v;
}

long long parse_int(const Token& t) {
  const char* begin = t.text.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end != begin + t.text.size()) {
    throw ParseError(t.line, t.col, "expected an integer, got '" + t.text + "'");
  }
  return v;
}

int find_id(const std::vector<std::string>& ids, const Token& t,
            const char* kind) {
  const auto it = std::find(ids.begin(), ids.end(), t.text);
  if (it == ids.end()) {
    throw ParseError(t.line, t.col,
                     std::string("unknown ") + kind + " id '" + t.text + "'");
  }
  return static_cast<int>(it - ids.begin());
}

}  // namespace

FactoredDecMdp parse_problem(std::string_view text) {
  const auto lines = tokenize(text);
  std::size_t at = 0;
  auto eof_error = [&lines]() -> ParseError {
    const int line = lines.empty() ? 1 : lines.back().front().line + 1;
    return ParseError(line, 1, "unexpected end of file");
  };
  auto peek = [&]() -> const std::vector<Token>* {
    return at < lines.size() ? &lines[at] : nullptr;
  };
  auto take = [&]() -> const std::vector<Token>& {
    if (at >= lines.size()) throw eof_error();
    return lines[at++];
  };
  auto expect_count = [](const std::vector<Token>& ln, std::size_t n) {
    if (ln.size() != n) {
      const Token& t = ln.size() > n ? ln[n] : ln.back();
      throw ParseError(t.line, t.col,
                       "expected " + std::to_string(n - 1) + " argument(s) for '" +
                           ln[0].text + "'");
    }
  };

  FactoredDecMdp model;

  {
    const auto& ln = take();
    if (ln[0].text != "agents") {
      throw ParseError(ln[0].line, ln[0].col, "expected 'agents', got '" + ln[0].text + "'");
    }
    expect_count(ln, 2);
    const long long n = parse_int(ln[1]);
    if (n < 2) throw ParseError(ln[1].line, ln[1].col, "at least 2 agents required");
    model.agents.resize(n);
  }

  for (int i = 0; i < model.agent_count(); ++i) {
    LocalAgentModel& ag = model.agents[i];
    {
      const auto& ln = take();
      if (ln[0].text != "obs") {
        throw ParseError(ln[0].line, ln[0].col,
                         "expected 'obs' for agent " + std::to_string(i));
      }
      for (std::size_t k = 1; k < ln.size(); ++k) {
        if (std::find(ag.observations.begin(), ag.observations.end(),
                      ln[k].text) != ag.observations.end()) {
          throw ParseError(ln[k].line, ln[k].col,
                           "duplicate observation id '" + ln[k].text + "'");
        }
        ag.observations.push_back(ln[k].text);
      }
      if (ag.observations.empty()) {
        throw ParseError(ln[0].line, ln[0].col, "empty observation set");
      }
    }
    {
      const auto& ln = take();
      if (ln[0].text != "actions") {
        throw ParseError(ln[0].line, ln[0].col,
                         "expected 'actions' for agent " + std::to_string(i));
      }
      for (std::size_t k = 1; k < ln.size(); ++k) {
        if (std::find(ag.actions.begin(), ag.actions.end(), ln[k].text) !=
            ag.actions.end()) {
          throw ParseError(ln[k].line, ln[k].col,
                           "duplicate action id '" + ln[k].text + "'");
        }
        ag.actions.push_back(ln[k].text);
      }
      if (ag.actions.empty()) {
        throw ParseError(ln[0].line, ln[0].col, "empty action set");
      }
    }
    ag.transition.assign(static_cast<std::size_t>(ag.obs_count()) *
                             ag.action_count() * ag.obs_count(),
                         0.0);
    std::vector<int> row_line(static_cast<std::size_t>(ag.obs_count()) *
                                  ag.action_count(),
                              0);
    while (peek() && (*peek())[0].text == "t") {
      const auto& ln = take();
      expect_count(ln, 5);
      const int z = find_id(ag.observations, ln[1], "observation");
      const int a = find_id(ag.actions, ln[2], "action");
      const int z2 = find_id(ag.observations, ln[3], "observation");
      const double p = parse_real(ln[4]);
      if (p < 0.0 || p > 1.0) {
        throw ParseError(ln[4].line, ln[4].col, "probability outside [0,1]");
      }
      ag.prob_ref(z, a, z2) = p;
      if (row_line[static_cast<std::size_t>(z) * ag.action_count() + a] == 0) {
        row_line[static_cast<std::size_t>(z) * ag.action_count() + a] = ln[0].line;
      }
    }
    for (int z = 0; z < ag.obs_count(); ++z) {
      for (int a = 0; a < ag.action_count(); ++a) {
        double sum = 0.0;
        for (int z2 = 0; z2 < ag.obs_count(); ++z2) sum += ag.prob(z, a, z2);
        if (std::abs(sum - 1.0) > 1e-9) {
          const int line = row_line[static_cast<std::size_t>(z) * ag.action_count() + a];
          throw ParseError(line == 0 ? lines[at - 1][0].line : line, 1,
                           "agent " + std::to_string(i) + " transition row (z=" +
                               ag.observations[z] + ", a=" + ag.actions[a] +
                               ") sums to " + format_double(sum));
        }
      }
    }
  }

  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const int n = model.agent_count();
  while (peek() && (*peek())[0].text == "reward") {
    const auto& ln = take();
    expect_count(ln, static_cast<std::size_t>(2 * n) + 2);
    std::vector<int> digits(n);
    for (int i = 0; i < n; ++i) {
      digits[i] = find_id(model.agents[i].observations, ln[1 + i], "observation");
    }
    const long long s = states.encode(digits);
    for (int i = 0; i < n; ++i) {
      digits[i] = find_id(model.agents[i].actions, ln[1 + n + i], "action");
    }
    const long long a = actions.encode(digits);
    model.set_reward(s, a, parse_real(ln[1 + 2 * n]));
  }

  {
    const auto& ln = take();
    if (ln[0].text == "start") {
      if (ln.size() != static_cast<std::size_t>(states.size()) + 1) {
        throw ParseError(ln[0].line, ln[0].col,
                         "'start' needs " + std::to_string(states.size()) +
                             " probabilities, got " + std::to_string(ln.size() - 1));
      }
      double sum = 0.0;
      for (long long s = 0; s < states.size(); ++s) {
        const double p = parse_real(ln[1 + s]);
        if (p < 0.0 || p > 1.0) {
          throw ParseError(ln[1 + s].line, ln[1 + s].col, "probability outside [0,1]");
        }
        model.initial.p.push_back(p);
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ParseError(ln[0].line, ln[0].col,
                         "initial occupancy sums to " + format_double(sum));
      }
    } else if (ln[0].text == "start-factored") {
      expect_count(ln, 1);
      FactoredOccupancy f;
      f.stage = 0;
      for (int i = 0; i < n; ++i) {
        const auto& ml = take();
        if (ml.size() != static_cast<std::size_t>(model.agents[i].obs_count())) {
          throw ParseError(ml[0].line, ml[0].col,
                           "agent " + std::to_string(i) + " marginal needs " +
                               std::to_string(model.agents[i].obs_count()) +
                               " probabilities");
        }
        std::vector<double> marginal;
        double sum = 0.0;
        for (const Token& t : ml) {
          const double p = parse_real(t);
          if (p < 0.0 || p > 1.0) {
            throw ParseError(t.line, t.col, "probability outside [0,1]");
          }
          marginal.push_back(p);
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          throw ParseError(ml[0].line, ml[0].col,
                           "agent " + std::to_string(i) + " marginal sums to " +
                               format_double(sum));
        }
        f.marginals.push_back(std::move(marginal));
      }
      model.initial = join(f);
    } else {
      throw ParseError(ln[0].line, ln[0].col,
                       "expected 'start' or 'start-factored', got '" + ln[0].text + "'");
    }
    model.initial.stage = 0;
  }

  {
    const auto& ln = take();
    if (ln[0].text != "horizon") {
      throw ParseError(ln[0].line, ln[0].col, "expected 'horizon', got '" + ln[0].text + "'");
    }
    expect_count(ln, 2);
    const long long T = parse_int(ln[1]);
    if (T < 1) throw ParseError(ln[1].line, ln[1].col, "horizon must be positive");
    model.horizon = static_cast<int>(T);
  }

  if (peek()) {
    const Token& t = (*peek())[0];
    throw ParseError(t.line, t.col, "unexpected content after 'horizon'");
  }
  return model;
}

std::string serialize_problem(const FactoredDecMdp& model) {
  std::string out;
  out += "agents " + std::to_string(model.agent_count()) + "\n";
  for (const auto& ag : model.agents) {
    out += "obs";
    for (const auto& id : ag.observations) out += " " + id;
    out += "\nactions";
    for (const auto& id : ag.actions) out += " " + id;
    out += "\n";
    for (int z = 0; z < ag.obs_count(); ++z) {
      for (int a = 0; a < ag.action_count(); ++a) {
        for (int z2 = 0; z2 < ag.obs_count(); ++z2) {
          const double p = ag.prob(z, a, z2);
          if (p != 0.0) {
            out += "t " + ag.observations[z] + " " + ag.actions[a] + " " +
                   ag.observations[z2] + " " + format_double(p) + "\n";
          }
        }
      }
    }
  }

  const JointSpace states = model.state_space();
  const JointSpace actions = model.action_space();
  const int n = model.agent_count();
  std::map<std::uint64_t, double> sorted(model.reward_entries.begin(),
                                         model.reward_entries.end());
  std::vector<int> digits(n);
  for (const auto& [key, value] : sorted) {
    if (value == 0.0) continue;
    const long long s = static_cast<long long>(key) / actions.size();
    const long long a = static_cast<long long>(key) % actions.size();
    out += "reward";
    states.decode(s, digits);
    for (int i = 0; i < n; ++i) out += " " + model.agents[i].observations[digits[i]];
    actions.decode(a, digits);
    for (int i = 0; i < n; ++i) out += " " + model.agents[i].actions[digits[i]];
    out += " " + format_double(value) + "\n";
  }

  out += "start";
  for (double p : model.initial.p) out += " " + format_double(p);
  out += "\nhorizon " + std::to_string(model.horizon) + "\n";
  return out;
}

std::string serialize_policy(const PolicyFileData& data) {
  std::string out = "mps-policy v1\n";
  out += "agents " + std::to_string(data.shape.size()) + "\n";
  out += "horizon " + std::to_string(data.policy.rules.size()) + "\n";
  for (std::size_t i = 0; i < data.shape.size(); ++i) {
    out += "shape " + std::to_string(i) + " " + std::to_string(data.shape[i].first) +
           " " + std::to_string(data.shape[i].second) + "\n";
  }
  out += "lower " + format_double(data.lower) + "\n";
  out += "upper " + format_double(data.upper) + "\n";
  out += "epsilon " + format_double(data.epsilon) + "\n";
  out += "seed " + std::to_string(data.seed) + "\n";
  for (std::size_t tau = 0; tau < data.policy.rules.size(); ++tau) {
    const auto& rule = data.policy.rules[tau];
    for (std::size_t i = 0; i < rule.action.size(); ++i) {
      for (std::size_t z = 0; z < rule.action[i].size(); ++z) {
        out += std::to_string(tau) + " " + std::to_string(i) + " " +
               std::to_string(z) + " " + std::to_string(rule.action[i][z]) + "\n";
      }
    }
  }
  return out;
}

PolicyFileData parse_policy(std::string_view text) {
  const auto lines = tokenize(text);
  std::size_t at = 0;
  auto take = [&]() -> const std::vector<Token>& {
    if (at >= lines.size()) {
      const int line = lines.empty() ? 1 : lines.back().front().line + 1;
      throw ParseError(line, 1, "unexpected end of policy file");
    }
    return lines[at++];
  };
  auto expect_key = [&](const char* key, std::size_t args) -> const std::vector<Token>& {
    const auto& ln = take();
    if (ln[0].text != key || ln.size() != args + 1) {
      throw ParseError(ln[0].line, ln[0].col, std::string("expected '") + key + "' line");
    }
    return ln;
  };

  {
    const auto& ln = take();
    if (ln.size() != 2 || ln[0].text != "mps-policy" || ln[1].text != "v1") {
      throw ParseError(ln[0].line, ln[0].col, "expected 'mps-policy v1' header");
    }
  }

  PolicyFileData data;
  const long long agents = parse_int(expect_key("agents", 1)[1]);
  const long long horizon = parse_int(expect_key("horizon", 1)[1]);
  if (agents < 1 || horizon < 1) {
    throw ParseError(1, 1, "agents and horizon must be positive");
  }
  for (long long i = 0; i < agents; ++i) {
    const auto& ln = expect_key("shape", 3);
    if (parse_int(ln[1]) != i) {
      throw ParseError(ln[1].line, ln[1].col, "shape lines must be in agent order");
    }
    data.shape.emplace_back(static_cast<int>(parse_int(ln[2])),
                            static_cast<int>(parse_int(ln[3])));
  }
  data.lower = parse_real(expect_key("lower", 1)[1]);
  data.upper = parse_real(expect_key("upper", 1)[1]);
  data.epsilon = parse_real(expect_key("epsilon", 1)[1]);
  data.seed = static_cast<std::uint64_t>(parse_int(expect_key("seed", 1)[1]));

  data.policy.rules.resize(horizon);
  std::vector<std::vector<std::vector<bool>>> seen(horizon);
  for (long long tau = 0; tau < horizon; ++tau) {
    data.policy.rules[tau].action.resize(agents);
    seen[tau].resize(agents);
    for (long long i = 0; i < agents; ++i) {
      data.policy.rules[tau].action[i].assign(data.shape[i].first, 0);
      seen[tau][i].assign(data.shape[i].first, false);
    }
  }
  while (at < lines.size()) {
    const auto& ln = take();
    if (ln.size() != 4) {
      throw ParseError(ln[0].line, ln[0].col, "expected 'tau agent obs action'");
    }
    const long long tau = parse_int(ln[0]);
    const long long i = parse_int(ln[1]);
    const long long z = parse_int(ln[2]);
    const long long a = parse_int(ln[3]);
    if (tau < 0 || tau >= horizon || i < 0 || i >= agents || z < 0 ||
        z >= data.shape[i].first || a < 0 || a >= data.shape[i].second) {
      throw ParseError(ln[0].line, ln[0].col, "rule entry out of range");
    }
    if (seen[tau][i][z]) {
      throw ParseError(ln[0].line, ln[0].col, "duplicate rule entry");
    }
    seen[tau][i][z] = true;
    data.policy.rules[tau].action[i][z] = static_cast<int>(a);
  }
  for (long long tau = 0; tau < horizon; ++tau) {
    for (long long i = 0; i < agents; ++i) {
      for (int z = 0; z < data.shape[i].first; ++z) {
        if (!seen[tau][i][z]) {
          throw ParseError(1, 1,
                           "missing rule entry for stage " + std::to_string(tau) +
                               ", agent " + std::to_string(i) + ", observation " +
                               std::to_string(z));
        }
      }
    }
  }
  return data;
}

}  // namespace decmps
