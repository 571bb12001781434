#include "banditgame/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace banditgame {

SolverError::SolverError(const std::string& what, double residual)
    : std::runtime_error(what), residual_(residual) {}

namespace {

constexpr double kResidualTarget = 1e-12;
constexpr double kResidualAccept = 1e-10;
constexpr int kMaxIterations = 200;

void check_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw std::invalid_argument(std::string(what) + " coordinate " + std::to_string(i) +
                                  " is not finite");
    }
  }
}

void check_played(std::span<const double> strategy, std::size_t played) {
  if (played >= strategy.size()) throw std::invalid_argument("played action out of range");
  if (strategy[played] < kMinPlayedProbability) {
    std::ostringstream os;
    os << "action " << played << " played with probability " << strategy[played]
       << "; learner state is corrupt";
    throw CorruptStateError(os.str());
  }
}

void check_loss(double loss) {
  if (!(loss >= 0.0 && loss <= 2.0)) {
    throw std::invalid_argument("loss observation " + std::to_string(loss) + " is outside [0, 2]");
  }
}

}  // namespace

FtrlSolution ftrl_solve_into(std::span<const double> cum_loss, double eta, std::span<double> out) {
  const std::size_t m = cum_loss.size();
  if (m == 0) throw std::invalid_argument("ftrl_solve needs at least one action");
  if (out.size() != m) throw std::invalid_argument("ftrl_solve output has wrong length");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("ftrl_solve needs eta > 0");
  check_finite(cum_loss, "cumulative loss");

  const double min_loss = *std::min_element(cum_loss.begin(), cum_loss.end());

  // With L' = L - min L, g(lambda) = sum (eta (L'_i + lambda))^-2 - 1 is
  // convex and decreasing; g(1/eta) >= 0 >= g(sqrt(m)/eta).
  double lo = 1.0 / eta;
  double hi = std::sqrt(static_cast<double>(m)) / eta;

  auto evaluate = [&](double lambda, double& slope) {
    double sum = 0.0;
    double cubes = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = 1.0 / (eta * ((cum_loss[i] - min_loss) + lambda));
      const double w2 = w * w;
      sum += w2;
      cubes += w2 * w;
    }
    slope = -2.0 * eta * cubes;
    return sum - 1.0;
  };

  FtrlSolution solution;
  double lambda = 0.5 * (lo + hi);
  double slope = 0.0;
  double g = evaluate(lambda, slope);
  while (std::abs(g) > kResidualTarget && solution.iterations < kMaxIterations) {
    ++solution.iterations;
    if (g > 0.0) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    double next = lambda - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == lambda) break;  // bracket exhausted at double precision
    lambda = next;
    g = evaluate(lambda, slope);
  }

  solution.lambda = lambda;
  solution.residual = std::abs(g);
  if (!(solution.residual <= kResidualAccept)) {
    std::ostringstream os;
    os << "ftrl_solve did not converge after " << solution.iterations
       << " iterations; residual " << solution.residual;
    throw SolverError(os.str(), solution.residual);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 1.0 / (eta * ((cum_loss[i] - min_loss) + lambda));
    out[i] = w * w;
    sum += out[i];
  }
  for (std::size_t i = 0; i < m; ++i) out[i] /= sum;
  return solution;
}

MixedStrategy ftrl_solve(std::span<const double> cum_loss, double eta) {
  std::vector<double> x(cum_loss.size());
  ftrl_solve_into(cum_loss, eta, x);
  return MixedStrategy(std::move(x));
}

std::span<const double> tsallis_strategy(TsallisState& state) {
  if (!state.strategy_current) {
    ftrl_solve_into(state.cum_loss, tsallis_learning_rate(state.round), state.last_strategy);
    state.strategy_current = true;
  }
  return state.last_strategy;
}

void tsallis_update(TsallisState& state, std::size_t played, double loss_observation) {
  tsallis_strategy(state);
  check_played(state.last_strategy, played);
  check_loss(loss_observation);
  state.cum_loss[played] += loss_observation / state.last_strategy[played];
  ++state.round;
  state.strategy_current = false;
}

double exp3_learning_rate(std::size_t num_actions, std::uint64_t round) {
  const double m = static_cast<double>(num_actions);
  return std::sqrt(std::log(m) / (m * static_cast<double>(round)));
}

std::span<const double> exp3_strategy(Exp3State& state) {
  if (!state.strategy_current) {
    const double eta = exp3_learning_rate(state.cum_loss.size(), state.round);
    const double min_loss = *std::min_element(state.cum_loss.begin(), state.cum_loss.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < state.cum_loss.size(); ++i) {
      state.last_strategy[i] = std::exp(-eta * (state.cum_loss[i] - min_loss));
      sum += state.last_strategy[i];
    }
    for (double& p : state.last_strategy) p /= sum;
    state.strategy_current = true;
  }
  return state.last_strategy;
}

void exp3_update(Exp3State& state, std::size_t played, double loss_observation) {
  exp3_strategy(state);
  check_played(state.last_strategy, played);
  check_loss(loss_observation);
  state.cum_loss[played] += loss_observation / state.last_strategy[played];
  if (!std::isfinite(state.cum_loss[played])) {
    throw CorruptStateError("exp3 cumulative loss overflowed");
  }
  ++state.round;
  state.strategy_current = false;
}

std::size_t ucb1_select(const Ucb1State& state) {
  const std::size_t m = state.counts.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (state.counts[i] == 0) return i;
  }
  const double log_t = std::log(static_cast<double>(state.round));
  std::size_t best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double n = static_cast<double>(state.counts[i]);
    const double index = state.reward_sums[i] / n + std::sqrt(2.0 * log_t / n);
    if (index > best_index) {
      best_index = index;
      best = i;
    }
  }
  return best;
}

std::span<const double> ucb1_strategy(Ucb1State& state) {
  std::fill(state.last_strategy.begin(), state.last_strategy.end(), 0.0);
  state.last_strategy[ucb1_select(state)] = 1.0;
  return state.last_strategy;
}

void ucb1_update(Ucb1State& state, std::size_t played, double loss_observation) {
  if (played >= state.counts.size()) throw std::invalid_argument("played action out of range");
  check_loss(loss_observation);
  state.counts[played] += 1;
  state.reward_sums[played] += 1.0 - 0.5 * loss_observation;
  ++state.round;
}

const std::vector<std::string>& learner_names() {
  static const std::vector<std::string> names = {"tsallis", "exp3", "ucb1", "uniform"};
  return names;
}

std::unique_ptr<Learner> make_learner(const std::string& name, std::size_t num_actions) {
  if (num_actions == 0) throw std::invalid_argument("learner needs at least one action");
  if (name == "tsallis") return std::make_unique<TsallisInf>(num_actions);
  if (name == "exp3") return std::make_unique<Exp3>(num_actions);
  if (name == "ucb1") return std::make_unique<Ucb1>(num_actions);
  if (name == "uniform") {
    return std::make_unique<FixedStrategyLearner>(MixedStrategy::uniform(num_actions), "uniform");
  }
  throw std::invalid_argument("unknown learner \"" + name + "\" (expected tsallis, exp3, ucb1 or uniform)");
}

}  // namespace banditgame
