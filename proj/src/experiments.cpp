#include "banditgame/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "banditgame/dynamics.hpp"
#include "banditgame/equilibrium.hpp"
#include "banditgame/learners.hpp"
#include "banditgame/parallel.hpp"

namespace banditgame {

namespace {

using nlohmann::json;

constexpr const char* kCubeRootRule = "T^(-1/3)";

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid config:";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

/// Neumaier-compensated sum in index order.
double stable_sum(const std::vector<double>& values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

double epsilon_for(const RegretScalingConfig& config, std::uint64_t horizon) {
  if (config.fixed_epsilon) return *config.fixed_epsilon;
  return std::pow(static_cast<double>(horizon), -1.0 / 3.0);
}

/// Reads typed fields out of a JSON object, collecting every problem.
class FieldReader {
 public:
  FieldReader(const json& j, std::vector<std::string>& problems) : j_(j), problems_(problems) {
    if (!j_.is_object()) problems_.push_back("config must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(std::string(key) + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  void reject_unknown() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) problems_.push_back(key + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

std::vector<std::string> problems_of(const RegretScalingConfig& c) {
  std::vector<std::string> p;
  if (c.horizons.empty()) p.push_back("horizons: must list at least one horizon");
  for (std::size_t k = 0; k < c.horizons.size(); ++k) {
    if (c.horizons[k] == 0) p.push_back("horizons[" + std::to_string(k) + "]: must be positive");
    if (k > 0 && c.horizons[k] <= c.horizons[k - 1]) {
      p.push_back("horizons: must be strictly increasing");
      break;
    }
  }
  if (c.trials == 0) p.push_back("trials: must be at least 1");
  if (c.trials > 0xffffffffu) p.push_back("trials: at most 2^32 - 1");
  if (c.algorithms.empty()) p.push_back("algorithms: must name at least one algorithm");
  for (const auto& a : c.algorithms) {
    if (a != "tsallis" && a != "exp3" && a != "ucb1") {
      p.push_back("algorithms: \"" + a + "\" is not one of tsallis, exp3, ucb1");
    }
  }
  if (c.fixed_epsilon) {
    if (!(*c.fixed_epsilon > 0.0 && *c.fixed_epsilon < 1.0 / 3.0)) {
      p.push_back("epsilon: fixed value must lie in (0, 1/3)");
    }
  } else {
    for (std::uint64_t t : c.horizons) {
      if (t > 0 && t <= 27) {
        p.push_back("horizons: T = " + std::to_string(t) + " gives T^(-1/3) >= 1/3");
        break;
      }
    }
  }
  return p;
}

std::vector<std::string> problems_of(const PsneIdConfig& c) {
  std::vector<std::string> p;
  if (c.m < 3) p.push_back("m: must be at least 3");
  if (c.n < 3) p.push_back("n: must be at least 3");
  if (!(c.d_1 > 0.0)) p.push_back("d_1: must be positive");
  if (!(2.0 * c.d_1 <= 1.0)) p.push_back("d_1: must satisfy 2 d_1 <= 1");
  if (c.d_min_values.empty()) p.push_back("d_min: must list at least one value");
  for (std::size_t k = 0; k < c.d_min_values.size(); ++k) {
    const double d = c.d_min_values[k];
    if (!(d > 0.0 && d <= c.d_1)) {
      p.push_back("d_min[" + std::to_string(k) + "]: must lie in (0, d_1]");
    }
  }
  if (!(c.horizon_multiplier > 0.0)) p.push_back("horizon_multiplier: must be positive");
  if (c.trials == 0) p.push_back("trials: must be at least 1");
  if (c.trials > 0xffffffffu) p.push_back("trials: at most 2^32 - 1");
  if (!(c.success_target > 0.0 && c.success_target <= 1.0)) {
    p.push_back("success_target: must lie in (0, 1]");
  }
  return p;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(join_problems(problems)), problems_(std::move(problems)) {}

void validate(const RegretScalingConfig& config) {
  auto p = problems_of(config);
  if (!p.empty()) throw ConfigError(std::move(p));
}

void validate(const PsneIdConfig& config) {
  auto p = problems_of(config);
  if (!p.empty()) throw ConfigError(std::move(p));
}

json to_json(const RegretScalingConfig& c) {
  json j;
  j["horizons"] = c.horizons;
  j["trials"] = c.trials;
  j["algorithms"] = c.algorithms;
  if (c.fixed_epsilon) {
    j["epsilon"] = *c.fixed_epsilon;
  } else {
    j["epsilon"] = kCubeRootRule;
  }
  j["fit_t_min"] = c.fit_t_min;
  j["master_seed"] = c.master_seed;
  j["independent_feedback"] = c.independent_feedback;
  return j;
}

json to_json(const PsneIdConfig& c) {
  json j;
  j["m"] = c.m;
  j["n"] = c.n;
  j["d_1"] = c.d_1;
  j["d_min"] = c.d_min_values;
  j["horizon_multiplier"] = c.horizon_multiplier;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["success_target"] = c.success_target;
  j["independent_feedback"] = c.independent_feedback;
  return j;
}

RegretScalingConfig regret_config_from_json(const json& j) {
  std::vector<std::string> problems;
  RegretScalingConfig c;
  FieldReader r(j, problems);
  r.read("horizons", c.horizons);
  r.read("trials", c.trials);
  r.read("algorithms", c.algorithms);
  r.read("fit_t_min", c.fit_t_min);
  r.read("master_seed", c.master_seed);
  r.read("independent_feedback", c.independent_feedback);
  r.mark("epsilon");
  if (j.is_object() && j.contains("epsilon")) {
    const json& e = j.at("epsilon");
    if (e.is_number()) {
      c.fixed_epsilon = e.get<double>();
    } else if (!(e.is_string() && e.get<std::string>() == kCubeRootRule)) {
      problems.push_back(std::string("epsilon: expected a number or \"") + kCubeRootRule + "\"");
    }
  }
  r.reject_unknown();
  auto more = problems_of(c);
  problems.insert(problems.end(), more.begin(), more.end());
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

PsneIdConfig psne_config_from_json(const json& j) {
  std::vector<std::string> problems;
  PsneIdConfig c;
  FieldReader r(j, problems);
  r.read("m", c.m);
  r.read("n", c.n);
  r.read("d_1", c.d_1);
  r.read("d_min", c.d_min_values);
  r.read("horizon_multiplier", c.horizon_multiplier);
  r.read("trials", c.trials);
  r.read("master_seed", c.master_seed);
  r.read("success_target", c.success_target);
  r.read("independent_feedback", c.independent_feedback);
  r.reject_unknown();
  auto more = problems_of(c);
  problems.insert(problems.end(), more.begin(), more.end());
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

std::vector<std::string> preset_names() {
  return {"fig1-desk", "fig1-full", "fig2-desk", "fig2-ushape", "fig2-full"};
}

std::pair<std::string, json> preset(const std::string& name) {
  if (name == "fig1-desk" || name == "fig1-full") {
    RegretScalingConfig c;
    c.master_seed = 20240601;
    if (name == "fig1-desk") {
      for (int e = 12; e <= 18; ++e) c.horizons.push_back(std::uint64_t{1} << e);
      c.trials = 64;
      c.fit_t_min = std::uint64_t{1} << 15;
    } else {
      c.horizons = {1000, 2000, 5000, 10000, 20000, 50000, 100000, 200000, 500000, 1000000};
      c.trials = 512;
      c.fit_t_min = 100000;
    }
    return {"regret", to_json(c)};
  }
  if (name == "fig2-desk" || name == "fig2-ushape" || name == "fig2-full") {
    PsneIdConfig c;
    c.master_seed = 20240602;
    if (name == "fig2-desk") {
      c.d_min_values = {0.1, 0.05, 0.04, 0.02, 0.004};
    } else if (name == "fig2-ushape") {
      c.d_min_values = {0.1, 0.04, 0.004};
    } else {
      c.m = c.n = 256;
      c.d_1 = 0.1;
      c.d_min_values = {0.05, 0.02, 0.01, 0.005, 0.002};
      c.horizon_multiplier = 128.0;
      c.trials = 512;
    }
    return {"psne", to_json(c)};
  }
  throw std::out_of_range("unknown preset \"" + name + "\"");
}

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points, double t_min) {
  std::vector<double> xs, ys;
  for (const auto& [t, v] : points) {
    if (t >= t_min && t > 0.0 && v > 0.0) {
      xs.push_back(std::log10(t));
      ys.push_back(std::log10(v));
    }
  }
  LogLogFit fit;
  fit.points = xs.size();
  if (xs.size() < 2) return fit;
  const double count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx == 0.0) return fit;  // all points share one T
  fit.defined = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : std::min(1.0, (sxy * sxy) / (sxx * syy));
  return fit;
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

bool RegretRow::operator==(const RegretRow& o) const {
  return algorithm == o.algorithm && horizon == o.horizon && epsilon == o.epsilon &&
         mean_regret == o.mean_regret && p10 == o.p10 && p90 == o.p90 && trials == o.trials &&
         seed == o.seed;
}

bool IdentificationThreshold::operator==(const IdentificationThreshold& o) const {
  return d_min == o.d_min && ratio == o.ratio && opt == o.opt && horizon == o.horizon &&
         first_t == o.first_t && first_t_over_opt == o.first_t_over_opt &&
         min_rate_after == o.min_rate_after;
}

bool ExperimentResult::operator==(const ExperimentResult& o) const {
  return kind == o.kind && config == o.config && provenance == o.provenance &&
         regret_rows == o.regret_rows && psne_rows == o.psne_rows && fits == o.fits &&
         thresholds == o.thresholds;
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentResult run_regret_scaling(const RegretScalingConfig& config, unsigned threads) {
  validate(config);
  const std::size_t num_h = config.horizons.size();
  const std::size_t num_a = config.algorithms.size();
  const std::size_t trials = config.trials;

  std::vector<double> metric(num_h * num_a * trials, 0.0);
  std::vector<double> seconds(metric.size(), 0.0);
  SelfPlayOptions options;
  options.independent_feedback = config.independent_feedback;

  parallel_for(metric.size(), threads, [&](std::size_t task) {
    const std::size_t k = task % trials;
    const std::size_t a = (task / trials) % num_a;
    const std::size_t h = task / (trials * num_a);
    const std::uint64_t horizon = config.horizons[h];
    const auto start = std::chrono::steady_clock::now();
    const PayoffMatrix game = gen_example_2x2(epsilon_for(config, horizon));
    auto row = make_learner(config.algorithms[a], 2);
    auto col = make_learner(config.algorithms[a], 2);
    // Algorithms share streams per (T, trial): common random numbers.
    const RngStream rng(config.master_seed, trial_stream(h, k));
    try {
      const TrialRecord rec = run_selfplay(game, *row, *col, horizon, rng, options);
      const RegretSummary s = pseudo_regret(rec, game);
      metric[task] = s.reg_row + s.reg_col;
    } catch (const std::exception& e) {
      throw std::runtime_error(config.algorithms[a] + " T=" + std::to_string(horizon) + " trial " +
                               std::to_string(k) + ": " + e.what());
    }
    seconds[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  ExperimentResult result;
  result.kind = "regret";
  result.config = to_json(config);
  result.provenance.config_hash = config_hash(result.config);
  result.provenance.master_seed = config.master_seed;

  for (std::size_t a = 0; a < num_a; ++a) {
    std::vector<std::pair<double, double>> points;
    for (std::size_t h = 0; h < num_h; ++h) {
      const std::size_t base = (h * num_a + a) * trials;
      const std::vector<double> values(metric.begin() + base, metric.begin() + base + trials);
      const std::vector<double> times(seconds.begin() + base, seconds.begin() + base + trials);
      RegretRow row;
      row.algorithm = config.algorithms[a];
      row.horizon = config.horizons[h];
      row.epsilon = epsilon_for(config, row.horizon);
      row.mean_regret = stable_sum(values) / static_cast<double>(trials);
      row.p10 = percentile_nearest_rank(values, 10.0);
      row.p90 = percentile_nearest_rank(values, 90.0);
      row.trials = trials;
      row.seed = config.master_seed;
      row.wall_seconds = stable_sum(times);
      points.emplace_back(static_cast<double>(row.horizon), row.mean_regret);
      result.regret_rows.push_back(std::move(row));
    }
    const double t_min = static_cast<double>(config.fit_t_min);
    result.fits.push_back(SlopeFit{config.algorithms[a], t_min, fit_loglog_slope(points, t_min)});
  }
  return result;
}

ExperimentResult run_psne_identification(const PsneIdConfig& config, unsigned threads) {
  validate(config);
  const std::size_t num_d = config.d_min_values.size();
  const std::size_t trials = config.trials;

  struct Instance {
    PayoffMatrix game;
    std::pair<std::size_t, std::size_t> psne;
    double opt;
    std::uint64_t horizon;
    std::vector<std::uint64_t> schedule;
  };
  std::vector<Instance> instances;
  for (double d_min : config.d_min_values) {
    PayoffMatrix game = gen_hard_psne_instance(config.m, config.n, d_min, config.d_1);
    const EquilibriumSolution sol = solve_ne(game);
    const InstanceConstants constants = instance_constants(game, sol);
    if (constants.degenerate || !sol.is_pure) {
      throw ConfigError({"d_min = " + std::to_string(d_min) + ": instance has no strict unique PSNE"});
    }
    const auto horizon = static_cast<std::uint64_t>(std::ceil(config.horizon_multiplier * constants.opt));
    instances.push_back(Instance{std::move(game), {sol.support_rows[0], sol.support_cols[0]},
                                 constants.opt, horizon, checkpoint_schedule(horizon)});
  }

  // hits[task][q]: bit 0 realized-count identification, bit 1 mixed-mass.
  std::vector<std::vector<unsigned char>> hits(num_d * trials);
  std::vector<double> seconds(hits.size(), 0.0);
  SelfPlayOptions options;
  options.track_payoffs = false;
  options.independent_feedback = config.independent_feedback;

  parallel_for(hits.size(), threads, [&](std::size_t task) {
    const std::size_t k = task % trials;
    const std::size_t c = task / trials;
    const Instance& inst = instances[c];
    const auto start = std::chrono::steady_clock::now();
    TsallisInf row(config.m), col(config.n);
    const RngStream rng(config.master_seed, trial_stream(c, k));
    TrialRecord rec;
    try {
      rec = run_selfplay(inst.game, row, col, inst.horizon, rng, options);
    } catch (const std::exception& e) {
      throw std::runtime_error("d_min=" + std::to_string(config.d_min_values[c]) + " trial " +
                               std::to_string(k) + ": " + e.what());
    }
    auto& h = hits[task];
    h.reserve(rec.checkpoints.size());
    for (const Checkpoint& cp : rec.checkpoints) {
      const bool counted = cp.row_mode == inst.psne.first && cp.col_mode == inst.psne.second;
      const bool mass = cp.row_mass_mode == inst.psne.first && cp.col_mass_mode == inst.psne.second;
      h.push_back(static_cast<unsigned char>((counted ? 1 : 0) | (mass ? 2 : 0)));
    }
    seconds[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  ExperimentResult result;
  result.kind = "psne";
  result.config = to_json(config);
  result.provenance.config_hash = config_hash(result.config);
  result.provenance.master_seed = config.master_seed;

  for (std::size_t c = 0; c < num_d; ++c) {
    const Instance& inst = instances[c];
    IdentificationThreshold threshold;
    threshold.d_min = config.d_min_values[c];
    threshold.ratio = threshold.d_min / config.d_1;
    threshold.opt = inst.opt;
    threshold.horizon = inst.horizon;
    std::vector<double> rates;
    for (std::size_t q = 0; q < inst.schedule.size(); ++q) {
      std::size_t counted = 0, mass = 0;
      for (std::size_t k = 0; k < trials; ++k) {
        const unsigned char bits = hits[c * trials + k][q];
        counted += bits & 1u;
        mass += (bits >> 1) & 1u;
      }
      PsneRow row;
      row.d_min = threshold.d_min;
      row.d_1 = config.d_1;
      row.m = config.m;
      row.n = config.n;
      row.t = inst.schedule[q];
      row.t_over_opt = static_cast<double>(row.t) / inst.opt;
      row.success_rate = static_cast<double>(counted) / static_cast<double>(trials);
      row.success_rate_mixed = static_cast<double>(mass) / static_cast<double>(trials);
      row.trials = trials;
      row.seed = config.master_seed;
      rates.push_back(row.success_rate);
      if (!threshold.first_t && row.success_rate >= config.success_target) {
        threshold.first_t = row.t;
        threshold.first_t_over_opt = row.t_over_opt;
      }
      result.psne_rows.push_back(row);
    }
    if (threshold.first_t) {
      const auto first = std::find_if(result.psne_rows.end() - static_cast<std::ptrdiff_t>(rates.size()),
                                      result.psne_rows.end(),
                                      [&](const PsneRow& r) { return r.t == *threshold.first_t; });
      threshold.min_rate_after = 1.0;
      for (auto it = first; it != result.psne_rows.end(); ++it) {
        threshold.min_rate_after = std::min(threshold.min_rate_after, it->success_rate);
      }
    }
    for (std::size_t k = 0; k < trials; ++k) threshold.wall_seconds += seconds[c * trials + k];
    result.thresholds.push_back(threshold);
  }
  return result;
}

}  // namespace banditgame
