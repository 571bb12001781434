#include "banditgame/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "banditgame/parallel.hpp"

namespace banditgame {

TrialError::TrialError(std::uint64_t round, const std::string& what)
    : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}

std::vector<std::uint64_t> checkpoint_schedule(std::uint64_t horizon) {
  std::vector<std::uint64_t> rounds;
  for (std::uint64_t t = 1; t <= horizon; t *= 2) {
    rounds.push_back(t);
    if (t > horizon / 2) break;
  }
  if (horizon > 0 && rounds.back() != horizon) rounds.push_back(horizon);
  return rounds;
}

TrialRecord run_selfplay(const PayoffMatrix& a, Learner& row, Learner& col, std::uint64_t horizon,
                         RngStream rng, const SelfPlayOptions& options) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (horizon == 0) throw std::invalid_argument("run_selfplay: horizon must be positive");
  if (row.num_actions() != m || col.num_actions() != n) {
    throw std::invalid_argument("run_selfplay: learner dimensions do not match the matrix");
  }
  if (options.record_trajectory && horizon > kMaxTrajectoryHorizon) {
    throw std::invalid_argument("run_selfplay: trajectories are only recorded for T <= " +
                                std::to_string(kMaxTrajectoryHorizon));
  }

  TrialRecord rec;
  rec.horizon = horizon;
  rec.seed = rng.seed();
  rec.stream = rng.stream();
  rec.payoffs_tracked = options.track_payoffs;
  rec.row_loss_profile.assign(m, 0.0);
  rec.col_loss_profile.assign(n, 0.0);
  rec.realized_row_counts.assign(m, 0);
  rec.realized_col_counts.assign(n, 0);
  if (options.record_trajectory) {
    rec.trajectory.emplace();
    rec.trajectory->reserve(horizon);
  }

  std::vector<double> sum_x(m, 0.0), sum_y(n, 0.0), ay(m, 0.0);
  const std::vector<std::uint64_t> schedule = checkpoint_schedule(horizon);
  std::size_t next_checkpoint = 0;

  for (std::uint64_t t = 1; t <= horizon; ++t) {
    try {
      const std::span<const double> x = row.strategy();
      const std::span<const double> y = col.strategy();
      const std::size_t i = sample_action(x, rng);
      const std::size_t j = sample_action(y, rng);
      const double r_row = sample_outcome(a(i, j), rng);
      const double r_col = options.independent_feedback ? sample_outcome(a(i, j), rng) : r_row;

      if (options.track_payoffs) {
        a.multiply(y, ay);
        double expected = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          rec.row_loss_profile[k] += ay[k];
          expected += x[k] * ay[k];
        }
        rec.payoff_sum += expected;
      }
      for (std::size_t k = 0; k < m; ++k) sum_x[k] += x[k];
      for (std::size_t k = 0; k < n; ++k) sum_y[k] += y[k];
      ++rec.realized_row_counts[i];
      ++rec.realized_col_counts[j];

      if (next_checkpoint < schedule.size() && schedule[next_checkpoint] == t) {
        Checkpoint cp;
        cp.t = t;
        cp.x.assign(x.begin(), x.end());
        cp.y.assign(y.begin(), y.end());
        cp.row_mode = argmax_lowest(rec.realized_row_counts);
        cp.col_mode = argmax_lowest(rec.realized_col_counts);
        cp.row_mass_mode = argmax_lowest(sum_x);
        cp.col_mass_mode = argmax_lowest(sum_y);
        rec.checkpoints.push_back(std::move(cp));
        ++next_checkpoint;
      }
      if (rec.trajectory) {
        rec.trajectory->push_back(RoundRecord{std::vector<double>(x.begin(), x.end()),
                                              std::vector<double>(y.begin(), y.end()), i, j, r_row,
                                              r_col});
      }

      row.update(i, 1.0 - r_row);
      col.update(j, 1.0 + r_col);
    } catch (const std::exception& e) {
      throw TrialError(t, e.what());
    }
  }

  if (options.track_payoffs) a.multiply_transposed(sum_x, rec.col_loss_profile);
  const double inv_t = 1.0 / static_cast<double>(horizon);
  rec.avg_x.resize(m);
  rec.avg_y.resize(n);
  for (std::size_t k = 0; k < m; ++k) rec.avg_x[k] = sum_x[k] * inv_t;
  for (std::size_t k = 0; k < n; ++k) rec.avg_y[k] = sum_y[k] * inv_t;
  return rec;
}

RegretSummary pseudo_regret(const TrialRecord& record, const PayoffMatrix& a) {
  if (record.row_loss_profile.size() != a.rows() || record.col_loss_profile.size() != a.cols()) {
    throw std::invalid_argument("pseudo_regret: record does not match the matrix");
  }
  if (!record.payoffs_tracked) {
    throw std::invalid_argument("pseudo_regret: record was produced without payoff tracking");
  }
  const double best_row =
      *std::max_element(record.row_loss_profile.begin(), record.row_loss_profile.end());
  const double best_col =
      *std::min_element(record.col_loss_profile.begin(), record.col_loss_profile.end());
  RegretSummary s;
  s.reg_row = best_row - record.payoff_sum;
  s.reg_col = record.payoff_sum - best_col;
  s.dgap_avg = (s.reg_row + s.reg_col) / static_cast<double>(record.horizon);
  return s;
}

namespace {

/// D(target, base) needs base > 0 wherever target > 0.
bool defined_at(std::span<const double> target, std::span<const double> base) {
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!(base[i] > 0.0) && target[i] != 0.0) return false;
  }
  return true;
}

}  // namespace

std::vector<LastIteratePoint> last_iterate_metrics(const TrialRecord& record,
                                                   const EquilibriumSolution& sol,
                                                   const PayoffMatrix& a) {
  if (!sol.is_pure) {
    throw std::invalid_argument("last_iterate_metrics: the Bregman series needs a pure equilibrium");
  }
  std::vector<LastIteratePoint> series;
  series.reserve(record.checkpoints.size());
  for (const Checkpoint& cp : record.checkpoints) {
    LastIteratePoint p;
    p.t = cp.t;
    p.dgap = duality_gap(a, cp.x, cp.y);
    if (defined_at(sol.x_star.probs(), cp.x) && defined_at(sol.y_star.probs(), cp.y)) {
      p.bregman_sum = bregman_half_tsallis(sol.x_star.probs(), cp.x) +
                      bregman_half_tsallis(sol.y_star.probs(), cp.y);
    } else {
      p.valid = false;
      p.bregman_sum = std::numeric_limits<double>::quiet_NaN();
    }
    series.push_back(p);
  }
  return series;
}

std::pair<std::size_t, std::size_t> identify_psne(const TrialRecord& record) {
  return {argmax_lowest(record.realized_row_counts), argmax_lowest(record.realized_col_counts)};
}

BoostedIdentification boosted_identify(const PayoffMatrix& a, const LearnerFactory& factory,
                                       std::uint64_t horizon, std::size_t trials,
                                       std::uint64_t master_seed, unsigned threads) {
  if (trials == 0) throw std::invalid_argument("boosted_identify: need at least one trial");
  BoostedIdentification out;
  out.votes.resize(trials);
  SelfPlayOptions options;
  options.track_payoffs = false;
  parallel_for(trials, threads, [&](std::size_t s) {
    auto row = factory(a.rows());
    auto col = factory(a.cols());
    const TrialRecord rec = run_selfplay(a, *row, *col, horizon, RngStream(master_seed, s), options);
    out.votes[s] = identify_psne(rec);
  });
  std::vector<std::size_t> row_votes(a.rows(), 0), col_votes(a.cols(), 0);
  for (const auto& [i, j] : out.votes) {
    ++row_votes[i];
    ++col_votes[j];
  }
  out.identified = {argmax_lowest(row_votes), argmax_lowest(col_votes)};
  return out;
}

}  // namespace banditgame
