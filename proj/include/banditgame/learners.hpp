#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "banditgame/game.hpp"

namespace banditgame {

/// Root finding for the FTRL normalizer did not reach the residual target.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Played action had (numerically) zero probability under the cached strategy.
class CorruptStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr double kMinPlayedProbability = 1e-15;

/// Result of the 1/2-Tsallis FTRL step, with diagnostics.
struct FtrlSolution {
  double lambda = 0.0;    ///< normalizer, relative to min(cum_loss)
  double residual = 0.0;  ///< |sum x - 1| before the final renormalization
  int iterations = 0;
};

/// argmin_x <L, x> - (2/eta) sum_i sqrt(x_i) over the simplex.
///
/// The minimizer is x_i = 1 / (eta (L_i + lambda))^2 where lambda is the
/// unique root of g(lambda) = sum_i x_i - 1 with eta (L_i + lambda) > 0.
/// After shifting L so that min L = 0 the root lies in [1/eta, sqrt(m)/eta];
/// it is found by Newton's method from the bracket midpoint, falling back to
/// bisection whenever a Newton step leaves the current bracket.
FtrlSolution ftrl_solve_into(std::span<const double> cum_loss, double eta, std::span<double> out);
MixedStrategy ftrl_solve(std::span<const double> cum_loss, double eta);

/// Tsallis-INF state. Loss estimates are accumulated unshifted (no "-1").
struct TsallisState {
  explicit TsallisState(std::size_t num_actions)
      : cum_loss(num_actions, 0.0), last_strategy(num_actions, 1.0 / static_cast<double>(num_actions)) {}

  std::vector<double> cum_loss;
  std::uint64_t round = 1;
  std::vector<double> last_strategy;
  bool strategy_current = false;  ///< last_strategy belongs to `round`
};

inline double tsallis_learning_rate(std::uint64_t round) {
  return 0.5 / std::sqrt(static_cast<double>(round));
}

/// Strategy for the current round (eta_t = 1 / (2 sqrt(t))); cached in the state.
std::span<const double> tsallis_strategy(TsallisState& state);
/// Importance-weighted update: cum_loss[played] += loss / x_t(played); round += 1.
void tsallis_update(TsallisState& state, std::size_t played, double loss_observation);

struct Exp3State {
  explicit Exp3State(std::size_t num_actions)
      : cum_loss(num_actions, 0.0), last_strategy(num_actions, 1.0 / static_cast<double>(num_actions)) {}

  std::vector<double> cum_loss;
  std::uint64_t round = 1;
  std::vector<double> last_strategy;
  bool strategy_current = false;
};

/// Anytime rate sqrt(ln m / (m t)).
double exp3_learning_rate(std::size_t num_actions, std::uint64_t round);
std::span<const double> exp3_strategy(Exp3State& state);
void exp3_update(Exp3State& state, std::size_t played, double loss_observation);

/// UCB1 over rewards remapped to [0, 1]. A loss observation l in [0, 2]
/// corresponds to reward 1 - l / 2 for either player.
struct Ucb1State {
  explicit Ucb1State(std::size_t num_actions)
      : counts(num_actions, 0), reward_sums(num_actions, 0.0), last_strategy(num_actions, 0.0) {}

  std::vector<std::uint64_t> counts;
  std::vector<double> reward_sums;
  std::uint64_t round = 1;
  std::vector<double> last_strategy;
};

/// Arm chosen at the current round: the first unpulled arm, otherwise
/// argmax mean + sqrt(2 ln t / count) with ties to the lowest index.
std::size_t ucb1_select(const Ucb1State& state);
std::span<const double> ucb1_strategy(Ucb1State& state);
void ucb1_update(Ucb1State& state, std::size_t played, double loss_observation);

/// Uniform interface seen by the self-play loop. A learner observes only its
/// own action and its own loss in [0, 2]; it never sees the opponent or the
/// payoff matrix.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_actions() const = 0;
  /// Mixed strategy for the current round. Valid until the next update().
  virtual std::span<const double> strategy() = 0;
  virtual void update(std::size_t played, double loss_observation) = 0;
};

class TsallisInf final : public Learner {
 public:
  explicit TsallisInf(std::size_t num_actions) : state_(num_actions) {}
  std::string name() const override { return "tsallis"; }
  std::size_t num_actions() const override { return state_.cum_loss.size(); }
  std::span<const double> strategy() override { return tsallis_strategy(state_); }
  void update(std::size_t played, double loss) override { tsallis_update(state_, played, loss); }
  const TsallisState& state() const { return state_; }

 private:
  TsallisState state_;
};

class Exp3 final : public Learner {
 public:
  explicit Exp3(std::size_t num_actions) : state_(num_actions) {}
  std::string name() const override { return "exp3"; }
  std::size_t num_actions() const override { return state_.cum_loss.size(); }
  std::span<const double> strategy() override { return exp3_strategy(state_); }
  void update(std::size_t played, double loss) override { exp3_update(state_, played, loss); }
  const Exp3State& state() const { return state_; }

 private:
  Exp3State state_;
};

class Ucb1 final : public Learner {
 public:
  explicit Ucb1(std::size_t num_actions) : state_(num_actions) {}
  std::string name() const override { return "ucb1"; }
  std::size_t num_actions() const override { return state_.counts.size(); }
  std::span<const double> strategy() override { return ucb1_strategy(state_); }
  void update(std::size_t played, double loss) override { ucb1_update(state_, played, loss); }
  const Ucb1State& state() const { return state_; }

 private:
  Ucb1State state_;
};

/// Plays a fixed mixed strategy and ignores feedback.
class FixedStrategyLearner final : public Learner {
 public:
  explicit FixedStrategyLearner(MixedStrategy strategy, std::string label = "fixed")
      : strategy_(std::move(strategy)), label_(std::move(label)) {}
  std::string name() const override { return label_; }
  std::size_t num_actions() const override { return strategy_.size(); }
  std::span<const double> strategy() override { return strategy_.probs(); }
  void update(std::size_t, double) override {}

 private:
  MixedStrategy strategy_;
  std::string label_;
};

/// Names accepted by make_learner.
const std::vector<std::string>& learner_names();

/// "tsallis", "exp3", "ucb1" or "uniform"; throws std::invalid_argument otherwise.
std::unique_ptr<Learner> make_learner(const std::string& name, std::size_t num_actions);

}  // namespace banditgame
