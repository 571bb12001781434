#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "banditgame/equilibrium.hpp"
#include "banditgame/game.hpp"
#include "banditgame/learners.hpp"
#include "banditgame/rng.hpp"

namespace banditgame {

/// Full trajectories are only kept up to this horizon.
inline constexpr std::uint64_t kMaxTrajectoryHorizon = 10000;

/// A learner or solver failed inside run_selfplay.
class TrialError : public std::runtime_error {
 public:
  TrialError(std::uint64_t round, const std::string& what);
  std::uint64_t round() const { return round_; }

 private:
  std::uint64_t round_;
};

/// Snapshot at round t: the strategies played at t and the modes of play
/// over rounds 1..t.
struct Checkpoint {
  std::uint64_t t = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::size_t row_mode = 0;  ///< most played row (realized actions)
  std::size_t col_mode = 0;
  std::size_t row_mass_mode = 0;  ///< argmax of sum_s x_s (mixed mass)
  std::size_t col_mass_mode = 0;

  bool operator==(const Checkpoint&) const = default;
};

struct RoundRecord {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t row_action = 0;
  std::size_t col_action = 0;
  double row_outcome = 0.0;
  double col_outcome = 0.0;

  bool operator==(const RoundRecord&) const = default;
};

/// Streaming aggregates of one self-play run.
struct TrialRecord {
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool payoffs_tracked = true;
  std::vector<double> row_loss_profile;  ///< sum_t (A y_t)(i)
  std::vector<double> col_loss_profile;  ///< sum_t (A^T x_t)(j)
  double payoff_sum = 0.0;               ///< sum_t x_t^T A y_t
  std::vector<std::uint64_t> realized_row_counts;
  std::vector<std::uint64_t> realized_col_counts;
  std::vector<double> avg_x;
  std::vector<double> avg_y;
  std::vector<Checkpoint> checkpoints;
  std::optional<std::vector<RoundRecord>> trajectory;

  bool operator==(const TrialRecord&) const = default;
};

struct SelfPlayOptions {
  /// Keep every round; only allowed for T <= kMaxTrajectoryHorizon.
  bool record_trajectory = false;
  /// Each player observes its own independent sample with mean A(i, j).
  bool independent_feedback = false;
  /// Accumulate the O(mn)-per-round payoff profiles needed for regret.
  bool track_payoffs = true;
};

/// Rounds 1, 2, 4, ... up to T, plus T itself.
std::vector<std::uint64_t> checkpoint_schedule(std::uint64_t horizon);

/// Self-play with bandit feedback. Each round both learners report
/// strategies, actions are drawn independently, r ~ Ber±(A(i, j)) is drawn,
/// and the row learner sees loss 1 - r at i while the column learner sees
/// loss 1 + r at j. Deterministic in `rng`.
TrialRecord run_selfplay(const PayoffMatrix& a, Learner& row, Learner& col, std::uint64_t horizon,
                         RngStream rng, const SelfPlayOptions& options = {});
inline TrialRecord run_selfplay(const PayoffMatrix& a, Learner& row, Learner& col,
                                std::uint64_t horizon, std::uint64_t seed,
                                const SelfPlayOptions& options = {}) {
  return run_selfplay(a, row, col, horizon, RngStream(seed), options);
}

struct RegretSummary {
  double reg_row = 0.0;
  double reg_col = 0.0;
  double dgap_avg = 0.0;  ///< (reg_row + reg_col) / T
};

/// Regret against the best fixed action, computed from the recorded mixed
/// strategies (the conditional expectation of the realized regret).
RegretSummary pseudo_regret(const TrialRecord& record, const PayoffMatrix& a);

struct LastIteratePoint {
  std::uint64_t t = 0;
  double bregman_sum = 0.0;  ///< D(x*, x_t) + D(y*, y_t); NaN when undefined
  double dgap = 0.0;         ///< DGap(x_t, y_t)
  bool valid = true;         ///< false if x_t or y_t is zero where the equilibrium is not
};

/// Requires a pure equilibrium.
std::vector<LastIteratePoint> last_iterate_metrics(const TrialRecord& record,
                                                   const EquilibriumSolution& sol,
                                                   const PayoffMatrix& a);

/// Index of the largest entry; ties go to the lowest index.
template <typename T>
std::size_t argmax_lowest(const std::vector<T>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

/// Most frequently played (row, column) over the whole run.
std::pair<std::size_t, std::size_t> identify_psne(const TrialRecord& record);

using LearnerFactory = std::function<std::unique_ptr<Learner>(std::size_t num_actions)>;

struct BoostedIdentification {
  std::pair<std::size_t, std::size_t> identified;
  std::vector<std::pair<std::size_t, std::size_t>> votes;  ///< per trial
};

/// Runs S independent trials (trial s on stream s of master_seed) and takes
/// the per-side majority of their identify_psne outputs.
BoostedIdentification boosted_identify(const PayoffMatrix& a, const LearnerFactory& factory,
                                       std::uint64_t horizon, std::size_t trials,
                                       std::uint64_t master_seed, unsigned threads = 1);

}  // namespace banditgame
