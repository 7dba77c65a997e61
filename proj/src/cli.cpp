#include "decmps/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "decmps/bench.hpp"
#include "decmps/io.hpp"
#include "decmps/oracle.hpp"
#include "decmps/solver.hpp"
#include "decmps/util.hpp"

namespace decmps {

namespace {

struct ModelOptions {
  std::string problem_path;
  std::string bench;
  int side = 3;
  double slip = 0.1;
  int start1 = -1;
  int start2 = -1;
  int agents = 2;
  int klass = 0;
  int horizon = 0;  // 0 = keep the source's horizon
  std::uint64_t seed = 0;
};

void add_model_options(CLI::App* cmd, ModelOptions& opt, bool with_seed) {
  cmd->add_option("--problem", opt.problem_path, "problem file to load");
  cmd->add_option("--bench", opt.bench,
                  "built-in benchmark: recycling | meeting-grid | random-team");
  cmd->add_option("--side", opt.side, "meeting-grid side length");
  cmd->add_option("--slip", opt.slip, "meeting-grid slip probability");
  cmd->add_option("--start1", opt.start1, "meeting-grid start cell of agent 0");
  cmd->add_option("--start2", opt.start2, "meeting-grid start cell of agent 1");
  cmd->add_option("--agents", opt.agents, "random-team agent count");
  cmd->add_option("--class", opt.klass, "random-team interaction class (0-3)");
  cmd->add_option("--horizon", opt.horizon, "planning horizon override");
  if (with_seed) {
    cmd->add_option("--seed", opt.seed,
                    "seed for random-team generation and the initial policy");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

std::pair<FactoredDecMdp, std::string> load_model(const ModelOptions& opt) {
  FactoredDecMdp model;
  std::string name;
  if (!opt.problem_path.empty() && !opt.bench.empty()) {
    throw std::runtime_error("pass either --problem or --bench, not both");
  }
  if (!opt.problem_path.empty()) {
    model = parse_problem(read_file(opt.problem_path));
    name = opt.problem_path;
  } else if (opt.bench == "recycling") {
    RecyclingParams params;
    if (opt.horizon > 0) params.horizon = opt.horizon;
    model = gen_recycling(params);
    name = "recycling";
  } else if (opt.bench == "meeting-grid") {
    MeetingGridParams params;
    params.side = opt.side;
    params.slip = opt.slip;
    params.start1 = opt.start1;
    params.start2 = opt.start2;
    if (opt.horizon > 0) params.horizon = opt.horizon;
    model = gen_meeting_grid(params);
    name = "meeting-grid";
  } else if (opt.bench == "random-team") {
    RecyclingParams params;
    if (opt.horizon > 0) params.horizon = opt.horizon;
    model = gen_random_team(opt.agents, opt.klass, opt.seed, params);
    name = "random-team";
  } else if (opt.bench.empty()) {
    throw std::runtime_error("one of --problem or --bench is required");
  } else {
    throw std::runtime_error("unknown benchmark '" + opt.bench + "'");
  }
  if (opt.horizon > 0) model.horizon = opt.horizon;
  return {std::move(model), std::move(name)};
}

std::string round2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

int cmd_solve(const ModelOptions& opt, double epsilon, const std::string& mode,
              const std::string& policy_out, const std::string& trace_out,
              const std::string& stats_out) {
  auto [model, name] = load_model(opt);

  SolveConfig config;
  config.epsilon = epsilon;
  config.seed = opt.seed;
  if (mode == "exhaustive") {
    config.mode = BackupMode::exhaustive;
  } else if (mode == "cop") {
    config.mode = BackupMode::cop;
  } else {
    throw std::runtime_error("unknown mode '" + mode + "' (exhaustive | cop)");
  }

  const Solution sol = solve(model, config);

  std::cout << "problem:   " << name << "\n"
            << "mode:      " << mode << "\n"
            << "converged: " << (sol.converged ? "yes" : "no") << "\n"
            << "lower:     " << round2(sol.lower) << "\n"
            << "upper:     " << round2(sol.upper) << "\n"
            << "gap:       " << round2(sol.gap) << "\n"
            << "trials:    " << sol.trials << "\n"
            << "backups:   " << sol.backups << "\n"
            << "seconds:   " << round2(sol.wall_seconds) << "\n";

  if (!policy_out.empty()) {
    PolicyFileData data;
    data.policy = sol.policy;
    for (const auto& ag : model.agents) {
      data.shape.emplace_back(ag.obs_count(), ag.action_count());
    }
    data.lower = sol.lower;
    data.upper = sol.upper;
    data.epsilon = epsilon;
    data.seed = opt.seed;
    write_file(policy_out, serialize_policy(data));
  }
  if (!trace_out.empty()) {
    std::string csv = "trial,lower,upper,wall_seconds\n";
    for (const auto& rec : sol.trace) {
      csv += std::to_string(rec.trial) + "," + format_double(rec.lower) + "," +
             format_double(rec.upper) + "," + format_double(rec.seconds) + "\n";
    }
    write_file(trace_out, csv);
  }
  if (!stats_out.empty()) {
    std::string csv =
        "problem,n_agents,horizon,epsilon,mode,lower,upper,gap,trials,backups,"
        "wall_seconds\n";
    csv += name + "," + std::to_string(model.agent_count()) + "," +
           std::to_string(model.horizon) + "," + format_double(epsilon) + "," +
           mode + "," + format_double(sol.lower) + "," +
           format_double(sol.upper) + "," + format_double(sol.gap) + "," +
           std::to_string(sol.trials) + "," + std::to_string(sol.backups) +
           "," + format_double(sol.wall_seconds) + "\n";
    write_file(stats_out, csv);
  }
  return sol.converged ? 0 : 2;
}

int cmd_validate(const std::string& path) {
  const FactoredDecMdp model = parse_problem(read_file(path));
  const ValidationReport report = validate(model);
  if (report.ok()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& issue : report.issues) {
    std::cerr << issue.where << ": " << issue.message << "\n";
  }
  return 1;
}

int cmd_oracle(const ModelOptions& opt, bool with_history, long long cap) {
  auto [model, name] = load_model(opt);
  const auto [value, policy] = best_markov(model, cap);
  (void)policy;
  std::cout << "problem:     " << name << "\n"
            << "best-markov: " << format_double(value) << "\n";
  if (with_history) {
    const double hist = best_history(model, cap);
    std::cout << "best-history: " << format_double(hist) << "\n";
  }
  return 0;
}

int cmd_gen(const ModelOptions& opt, const std::string& out_path) {
  auto [model, name] = load_model(opt);
  (void)name;
  const std::string text = serialize_problem(model);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"epsilon-optimal planner for transition-independent decentralized MDPs"};
  app.require_subcommand(1);

  ModelOptions solve_opt;
  double epsilon = 1e-4;
  std::string mode = "cop";
  std::string policy_out, trace_out, stats_out;
  auto* solve_cmd = app.add_subcommand("solve", "plan to epsilon-optimality");
  add_model_options(solve_cmd, solve_opt, true);
  solve_cmd->add_option("--epsilon", epsilon, "convergence threshold");
  solve_cmd->add_option("--mode", mode, "backup mode: exhaustive | cop");
  solve_cmd->add_option("--policy-out", policy_out, "write the policy file here");
  solve_cmd->add_option("--trace-out", trace_out, "write per-trial bounds CSV here");
  solve_cmd->add_option("--stats-out", stats_out, "write the final metrics CSV here");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a problem file");
  validate_cmd->add_option("--problem", validate_path, "problem file")->required();

  ModelOptions oracle_opt;
  bool with_history = false;
  long long oracle_cap = kDefaultOracleCap;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "brute-force optima for tiny instances");
  add_model_options(oracle_cmd, oracle_opt, true);
  oracle_cmd->add_flag("--history", with_history,
                       "also enumerate history-dependent policies");
  oracle_cmd->add_option("--cap", oracle_cap, "enumeration cap");

  ModelOptions gen_opt;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "emit a benchmark as a problem file");
  add_model_options(gen_cmd, gen_opt, true);
  gen_cmd->add_option("--out", gen_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (solve_cmd->parsed()) {
      return cmd_solve(solve_opt, epsilon, mode, policy_out, trace_out, stats_out);
    }
    if (validate_cmd->parsed()) return cmd_validate(validate_path);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_opt, with_history, oracle_cap);
    if (gen_cmd->parsed()) return cmd_gen(gen_opt, gen_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace decmps
