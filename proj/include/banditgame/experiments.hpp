#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace banditgame {

inline constexpr const char* kCodeVersion = "banditgame 0.1.0";

/// Config failed validation; `problems()` lists every bad field.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct RegretScalingConfig {
  std::vector<std::uint64_t> horizons;
  std::size_t trials = 64;
  std::vector<std::string> algorithms = {"tsallis", "exp3", "ucb1"};
  /// Unset means eps = T^(-1/3).
  std::optional<double> fixed_epsilon;
  std::uint64_t fit_t_min = 1;
  std::uint64_t master_seed = 0;
  bool independent_feedback = false;
};

struct PsneIdConfig {
  std::size_t m = 16;
  std::size_t n = 16;
  double d_1 = 0.2;
  std::vector<double> d_min_values;
  double horizon_multiplier = 64.0;  ///< horizon = ceil(multiplier * OPT)
  std::size_t trials = 200;
  std::uint64_t master_seed = 0;
  double success_target = 0.75;
  bool independent_feedback = false;
};

/// Throws ConfigError listing all violations.
void validate(const RegretScalingConfig& config);
void validate(const PsneIdConfig& config);

nlohmann::json to_json(const RegretScalingConfig& config);
nlohmann::json to_json(const PsneIdConfig& config);
/// Parses and validates; unknown keys and type errors are reported together.
RegretScalingConfig regret_config_from_json(const nlohmann::json& j);
PsneIdConfig psne_config_from_json(const nlohmann::json& j);

std::vector<std::string> preset_names();
/// Presets: "fig1-desk", "fig1-full", "fig2-desk", "fig2-ushape", "fig2-full".
/// Returns {"regret" | "psne", config json}; throws std::out_of_range if unknown.
std::pair<std::string, nlohmann::json> preset(const std::string& name);

struct LogLogFit {
  bool defined = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;

  bool operator==(const LogLogFit&) const = default;
};

/// OLS of log10(value) on log10(T) over points with T >= t_min and value > 0.
LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points, double t_min);

/// Nearest-rank percentile (p in (0, 100]) of a nonempty sample.
double percentile_nearest_rank(std::vector<double> values, double p);

struct RegretRow {
  std::string algorithm;
  std::uint64_t horizon = 0;
  double epsilon = 0.0;
  double mean_regret = 0.0;  ///< mean over trials of reg_row + reg_col
  double p10 = 0.0;
  double p90 = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;  ///< not serialized

  bool operator==(const RegretRow& o) const;
};

struct PsneRow {
  double d_min = 0.0;
  double d_1 = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::uint64_t t = 0;
  double t_over_opt = 0.0;
  double success_rate = 0.0;        ///< identification from realized counts
  double success_rate_mixed = 0.0;  ///< identification from mixed-strategy mass
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  bool operator==(const PsneRow&) const = default;
};

struct SlopeFit {
  std::string label;
  double t_min = 0.0;
  LogLogFit fit;

  bool operator==(const SlopeFit&) const = default;
};

/// Per d_min: when the success rate first reached the target.
struct IdentificationThreshold {
  double d_min = 0.0;
  double ratio = 0.0;  ///< d_min / d_1
  double opt = 0.0;
  std::uint64_t horizon = 0;
  std::optional<std::uint64_t> first_t;
  std::optional<double> first_t_over_opt;
  double min_rate_after = 0.0;  ///< smallest rate at or after first_t
  double wall_seconds = 0.0;    ///< not serialized

  bool operator==(const IdentificationThreshold& o) const;
};

struct Provenance {
  std::string config_hash;  ///< FNV-1a 64 of the canonical config JSON, hex
  std::uint64_t master_seed = 0;
  std::string code_version = kCodeVersion;
  std::string rng = "philox4x32-10";

  bool operator==(const Provenance&) const = default;
};

struct ExperimentResult {
  std::string kind;  ///< "regret" or "psne"
  nlohmann::json config;
  Provenance provenance;
  std::vector<RegretRow> regret_rows;
  std::vector<PsneRow> psne_rows;
  std::vector<SlopeFit> fits;
  std::vector<IdentificationThreshold> thresholds;

  bool operator==(const ExperimentResult& o) const;
};

std::string config_hash(const nlohmann::json& config);

/// Stream id for trial `trial` of configuration `configuration`.
inline std::uint64_t trial_stream(std::uint64_t configuration, std::uint64_t trial) {
  return (configuration << 32) | (trial & 0xffffffffu);
}

/// Self-play on gen_example_2x2(eps(T)) for every (T, algorithm); the metric
/// is reg_row + reg_col per trial. Fits one slope per algorithm on T >= fit_t_min.
ExperimentResult run_regret_scaling(const RegretScalingConfig& config, unsigned threads = 1);

/// Tsallis-INF self-play on the hard PSNE instance for each d_min; success
/// rate of identify_psne at every checkpoint, x-axis normalized by OPT.
ExperimentResult run_psne_identification(const PsneIdConfig& config, unsigned threads = 1);

}  // namespace banditgame
