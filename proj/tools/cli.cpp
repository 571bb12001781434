#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "banditgame/dynamics.hpp"
#include "banditgame/equilibrium.hpp"
#include "banditgame/experiments.hpp"
#include "banditgame/game.hpp"
#include "banditgame/learners.hpp"
#include "banditgame/parallel.hpp"
#include "banditgame/results_io.hpp"

namespace banditgame::cli {

namespace {

using nlohmann::json;

/// Bad flags or flag combinations; maps to kExitUsage.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(std::span<const double> values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? " " : "") + num(values[i]);
  return s;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? " " : "") + std::to_string(values[i]);
  return s;
}

struct InstanceSpec {
  std::string gen;
  std::string matrix_path;
  double eps = 0.1;
  std::size_t m = 0;
  std::size_t n = 0;
  double d_min = 0.0;
  double d_1 = 0.0;
  std::vector<double> delta;
  std::vector<double> delta_prime;
};

void add_instance_options(CLI::App* cmd, InstanceSpec& spec) {
  auto* gen = cmd->add_option("--gen", spec.gen, "Generator: example2x2, hardpsne or lowerbound")
                  ->check(CLI::IsMember({"example2x2", "hardpsne", "lowerbound"}));
  auto* matrix = cmd->add_option("--matrix", spec.matrix_path, "Matrix file (\"m n\" then m rows)");
  gen->excludes(matrix);
  matrix->excludes(gen);
  cmd->add_option("--eps", spec.eps, "example2x2: epsilon in (0, 1/3)");
  cmd->add_option("--m", spec.m, "hardpsne: rows");
  cmd->add_option("--n", spec.n, "hardpsne: columns");
  cmd->add_option("--dmin", spec.d_min, "hardpsne: smallest gap d_min");
  cmd->add_option("--d1", spec.d_1, "hardpsne: gap d_1");
  cmd->add_option("--delta", spec.delta, "lowerbound: row gaps")->delimiter(',');
  cmd->add_option("--delta-prime", spec.delta_prime, "lowerbound: column gaps")->delimiter(',');
}

PayoffMatrix load_instance(const InstanceSpec& spec) {
  if (!spec.matrix_path.empty()) return load_matrix(spec.matrix_path);
  if (spec.gen.empty()) throw UsageError("exactly one of --gen or --matrix is required");
  if (spec.gen == "example2x2") return gen_example_2x2(spec.eps);
  if (spec.gen == "hardpsne") {
    if (spec.m == 0 || spec.n == 0 || spec.d_min <= 0.0 || spec.d_1 <= 0.0) {
      throw UsageError("hardpsne needs --m, --n, --dmin and --d1");
    }
    return gen_hard_psne_instance(spec.m, spec.n, spec.d_min, spec.d_1);
  }
  if (spec.delta.empty() || spec.delta_prime.empty()) {
    throw UsageError("lowerbound needs --delta and --delta-prime");
  }
  return gen_lower_bound_instance(spec.delta, spec.delta_prime);
}

json solution_json(const EquilibriumSolution& s) {
  return {{"x_star", std::vector<double>(s.x_star.probs().begin(), s.x_star.probs().end())},
          {"y_star", std::vector<double>(s.y_star.probs().begin(), s.y_star.probs().end())},
          {"value", s.value},
          {"support_rows", s.support_rows},
          {"support_cols", s.support_cols},
          {"is_pure", s.is_pure}};
}

json nonfinite_safe(double v) { return std::isfinite(v) ? json(v) : json(num(v)); }

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
  f.flush();
  if (!f) throw std::runtime_error("failed writing " + path);
}

int cmd_solve(const InstanceSpec& spec, const std::string& json_path, std::ostream& out) {
  const PayoffMatrix a = load_instance(spec);
  const EquilibriumSolution s = solve_ne(a);
  out << "x_star: " << join(s.x_star.probs()) << '\n'
      << "y_star: " << join(s.y_star.probs()) << '\n'
      << "value: " << num(s.value) << '\n'
      << "support_rows: " << join(s.support_rows) << '\n'
      << "support_cols: " << join(s.support_cols) << '\n'
      << "pure: " << (s.is_pure ? "yes" : "no") << '\n';
  if (!json_path.empty()) write_json_file(json_path, solution_json(s));
  return kExitOk;
}

int cmd_analyze(const InstanceSpec& spec, const std::string& json_path, std::ostream& out) {
  const PayoffMatrix a = load_instance(spec);
  const EquilibriumSolution s = solve_ne(a);
  const InstanceConstants c = instance_constants(a, s);
  out << "value: " << num(s.value) << '\n'
      << "x_star: " << join(s.x_star.probs()) << '\n'
      << "y_star: " << join(s.y_star.probs()) << '\n'
      << "delta: " << join(c.delta) << '\n'
      << "delta_prime: " << join(c.delta_prime) << '\n'
      << "omega: " << num(c.omega) << '\n'
      << "omega_prime: " << num(c.omega_prime) << '\n'
      << "gamma: " << num(c.gamma) << '\n'
      << "gamma_prime: " << num(c.gamma_prime) << '\n'
      << "delta_min: " << num(c.delta_min) << '\n'
      << "OPT: " << num(c.opt) << '\n';
  if (c.degenerate) out << "degenerate: some non-support gap is zero; omega and OPT are infinite\n";
  if (!json_path.empty()) {
    write_json_file(json_path, {{"solution", solution_json(s)},
                                {"delta", c.delta},
                                {"delta_prime", c.delta_prime},
                                {"omega", nonfinite_safe(c.omega)},
                                {"omega_prime", nonfinite_safe(c.omega_prime)},
                                {"gamma", c.gamma},
                                {"gamma_prime", c.gamma_prime},
                                {"delta_min", c.delta_min},
                                {"opt", nonfinite_safe(c.opt)},
                                {"degenerate", c.degenerate}});
  }
  return kExitOk;
}

struct RunOptions {
  std::string row_alg = "tsallis";
  std::string col_alg = "tsallis";
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  bool independent_feedback = false;
  std::string json_path;
  std::string trajectory_path;
  std::size_t boost = 0;
  unsigned threads = 0;
};

std::unique_ptr<Learner> learner_or_usage(const std::string& name, std::size_t actions) {
  try {
    return make_learner(name, actions);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_run(const InstanceSpec& spec, const RunOptions& o, std::ostream& out) {
  if (o.horizon == 0) throw UsageError("-T must be at least 1");
  const bool trajectory = !o.trajectory_path.empty();
  if (trajectory && o.horizon > kMaxTrajectoryHorizon) {
    throw UsageError("--debug-trajectory requires T <= " + std::to_string(kMaxTrajectoryHorizon));
  }
  if (o.boost > 0 && o.row_alg != o.col_alg) {
    throw UsageError("--boost runs one algorithm for both players; --row-alg and --col-alg must match");
  }
  const PayoffMatrix a = load_instance(spec);
  auto row = learner_or_usage(o.row_alg, a.rows());
  auto col = learner_or_usage(o.col_alg, a.cols());

  SelfPlayOptions options;
  options.record_trajectory = trajectory;
  options.independent_feedback = o.independent_feedback;
  const TrialRecord record = run_selfplay(a, *row, *col, o.horizon, o.seed, options);
  const RegretSummary regret = pseudo_regret(record, a);
  const auto [i, j] = identify_psne(record);

  out << "reg_row: " << num(regret.reg_row) << '\n'
      << "reg_col: " << num(regret.reg_col) << '\n'
      << "dgap_avg: " << num(regret.dgap_avg) << '\n'
      << "avg_x: " << join(record.avg_x) << '\n'
      << "avg_y: " << join(record.avg_y) << '\n'
      << "identified: " << i << ' ' << j << '\n';

  json boosted;
  if (o.boost > 0) {
    const std::string name = o.row_alg;
    const auto factory = [&name](std::size_t actions) { return make_learner(name, actions); };
    const BoostedIdentification b =
        boosted_identify(a, factory, o.horizon, o.boost, o.seed, resolve_thread_count(o.threads));
    out << "boosted (" << o.boost << " trials): " << b.identified.first << ' ' << b.identified.second
        << '\n';
    boosted = {{"trials", o.boost}, {"identified", {b.identified.first, b.identified.second}}};
  }

  if (!o.json_path.empty()) {
    json j_out = {{"row_algorithm", o.row_alg},
                  {"col_algorithm", o.col_alg},
                  {"T", o.horizon},
                  {"seed", o.seed},
                  {"independent_feedback", o.independent_feedback},
                  {"reg_row", regret.reg_row},
                  {"reg_col", regret.reg_col},
                  {"dgap_avg", regret.dgap_avg},
                  {"avg_x", record.avg_x},
                  {"avg_y", record.avg_y},
                  {"realized_row_counts", record.realized_row_counts},
                  {"realized_col_counts", record.realized_col_counts},
                  {"identified", {i, j}}};
    if (!boosted.is_null()) j_out["boosted"] = boosted;
    write_json_file(o.json_path, j_out);
  }
  if (trajectory) {
    json rounds = json::array();
    for (const RoundRecord& r : *record.trajectory) {
      rounds.push_back({{"x", r.x},
                        {"y", r.y},
                        {"row_action", r.row_action},
                        {"col_action", r.col_action},
                        {"row_outcome", r.row_outcome},
                        {"col_outcome", r.col_outcome}});
    }
    write_json_file(o.trajectory_path, {{"T", o.horizon}, {"seed", o.seed}, {"rounds", std::move(rounds)}});
  }
  return kExitOk;
}

struct ExperimentOptions {
  std::string preset;
  std::string config_path;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_prefix;
  bool svg = false;
};

void add_experiment_options(CLI::App* cmd, ExperimentOptions& o) {
  auto* p = cmd->add_option("--preset", o.preset, "Named preset");
  auto* c = cmd->add_option("--config", o.config_path, "JSON config file");
  p->excludes(c);
  c->excludes(p);
  cmd->add_option("--trials", o.trials, "Override the trial count");
  cmd->add_option("--seed", o.seed, "Override the master seed");
  cmd->add_option("--threads", o.threads, "Worker threads (default: BANDITGAME_THREADS or all cores)");
  cmd->add_option("--out", o.out_prefix, "Output path prefix; writes <prefix>.csv and <prefix>.json");
  cmd->add_flag("--svg", o.svg, "Also write <prefix>.svg");
}

/// Loads the preset or config file and applies flag overrides.
json effective_config(const ExperimentOptions& o, const std::string& kind, std::ostream& err) {
  json config;
  if (!o.preset.empty()) {
    std::pair<std::string, json> p;
    try {
      p = preset(o.preset);
    } catch (const std::out_of_range&) {
      std::string names;
      for (const auto& n : preset_names()) names += " " + n;
      err << "unknown preset \"" << o.preset << "\"; available:" << names << '\n';
      throw UsageError("unknown preset");
    }
    if (p.first != kind) throw UsageError("preset \"" + o.preset + "\" is not a " + kind + " experiment");
    config = std::move(p.second);
  } else if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw std::runtime_error("cannot open " + o.config_path);
    try {
      in >> config;
    } catch (const json::exception& e) {
      throw ConfigError({o.config_path + ": " + e.what()});
    }
  } else {
    throw UsageError("one of --preset or --config is required");
  }
  if (o.trials && config.is_object()) config["trials"] = *o.trials;
  if (o.seed && config.is_object()) config["master_seed"] = *o.seed;
  return config;
}

void write_outputs(const ExperimentResult& result, const std::string& prefix, bool svg, std::ostream& out) {
  write_results(result, prefix + ".csv", ResultFormat::csv);
  write_results(result, prefix + ".json", ResultFormat::json);
  out << "wrote " << prefix << ".csv, " << prefix << ".json";
  if (svg) {
    write_results(result, prefix + ".svg", ResultFormat::svg);
    out << ", " << prefix << ".svg";
  }
  out << '\n';
}

int cmd_regret_exp(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
  const RegretScalingConfig config = regret_config_from_json(effective_config(o, "regret", err));
  const ExperimentResult result = run_regret_scaling(config, resolve_thread_count(o.threads));
  for (const RegretRow& r : result.regret_rows) {
    out << r.algorithm << " T=" << r.horizon << " eps=" << num(r.epsilon) << " mean=" << num(r.mean_regret)
        << " p10=" << num(r.p10) << " p90=" << num(r.p90) << " trials=" << r.trials << " ("
        << num(r.wall_seconds) << " s)\n";
  }
  for (const SlopeFit& f : result.fits) {
    out << "slope " << f.label << ": ";
    if (f.fit.defined) {
      out << num(f.fit.slope) << " (r2 " << num(f.fit.r2) << ", " << f.fit.points << " points, T >= "
          << num(f.t_min) << ")\n";
    } else {
      out << "undefined (fewer than 2 points with T >= " << num(f.t_min) << ")\n";
    }
  }
  write_outputs(result, o.out_prefix.empty() ? (o.preset.empty() ? "regret" : o.preset) : o.out_prefix,
                o.svg, out);
  return kExitOk;
}

int cmd_psne_exp(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
  const PsneIdConfig config = psne_config_from_json(effective_config(o, "psne", err));
  const ExperimentResult result = run_psne_identification(config, resolve_thread_count(o.threads));
  for (const PsneRow& r : result.psne_rows) {
    out << "d_min=" << num(r.d_min) << " t=" << r.t << " t/OPT=" << num(r.t_over_opt)
        << " success=" << num(r.success_rate) << " mixed=" << num(r.success_rate_mixed)
        << " trials=" << r.trials << '\n';
  }
  for (const IdentificationThreshold& t : result.thresholds) {
    out << "threshold d_min=" << num(t.d_min) << " ratio=" << num(t.ratio) << " OPT=" << num(t.opt)
        << " T=" << t.horizon << ": ";
    if (t.first_t) {
      out << "rate >= " << num(config.success_target) << " first at t=" << *t.first_t
          << " (t/OPT=" << num(*t.first_t_over_opt) << "), min rate after " << num(t.min_rate_after);
    } else {
      out << "rate never reached " << num(config.success_target);
    }
    out << " (" << num(t.wall_seconds) << " s)\n";
  }
  write_outputs(result, o.out_prefix.empty() ? (o.preset.empty() ? "psne" : o.preset) : o.out_prefix,
                o.svg, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bandit self-play in zero-sum matrix games", "banditgame"};
  app.require_subcommand(1);

  InstanceSpec spec;
  std::string json_path;
  RunOptions run;
  ExperimentOptions exp;

  auto* solve = app.add_subcommand("solve", "Nash equilibrium of an instance");
  add_instance_options(solve, spec);
  solve->add_option("--json", json_path, "Also write the solution as JSON");

  auto* analyze = app.add_subcommand("analyze", "Gap vectors, omega, gamma and OPT of an instance");
  add_instance_options(analyze, spec);
  analyze->add_option("--json", json_path, "Also write the constants as JSON");

  auto* run_cmd = app.add_subcommand("run", "One self-play run");
  add_instance_options(run_cmd, spec);
  run_cmd->add_option("--row-alg", run.row_alg, "Row learner: tsallis, exp3, ucb1 or uniform");
  run_cmd->add_option("--col-alg", run.col_alg, "Column learner");
  run_cmd->add_option("-T,--horizon", run.horizon, "Number of rounds")->required();
  run_cmd->add_option("--seed", run.seed, "Seed");
  run_cmd->add_flag("--independent-feedback", run.independent_feedback,
                    "Each player observes its own outcome sample");
  run_cmd->add_option("--json", run.json_path, "Write the run summary as JSON");
  run_cmd->add_option("--debug-trajectory", run.trajectory_path, "Write every round as JSON (T <= 10000)");
  run_cmd->add_option("--boost", run.boost, "Also run boosted identification with this many trials");
  run_cmd->add_option("--threads", run.threads, "Worker threads for --boost");

  auto* regret = app.add_subcommand("regret-exp", "Regret scaling experiment");
  add_experiment_options(regret, exp);
  auto* psne = app.add_subcommand("psne-exp", "PSNE identification experiment");
  add_experiment_options(psne, exp);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(spec, json_path, out);
    if (analyze->parsed()) return cmd_analyze(spec, json_path, out);
    if (run_cmd->parsed()) return cmd_run(spec, run, out);
    if (regret->parsed()) return cmd_regret_exp(exp, out, err);
    return cmd_psne_exp(exp, out, err);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const MatrixParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace banditgame::cli
