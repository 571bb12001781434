#include <doctest.h>

#include <cmath>
#include <random>

#include "banditgame/dynamics.hpp"
#include "banditgame/experiments.hpp"
#include "oracles.hpp"

using namespace banditgame;

namespace {

PayoffMatrix random_matrix(std::mt19937_64& gen, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> e(m * n);
  for (double& v : e) v = u(gen);
  return PayoffMatrix(m, n, e);
}

TrialRecord tsallis_selfplay(const PayoffMatrix& a, std::uint64_t horizon, RngStream rng,
                             const SelfPlayOptions& options = {}) {
  TsallisInf row(a.rows()), col(a.cols());
  return run_selfplay(a, row, col, horizon, rng, options);
}

}  // namespace

TEST_CASE("checkpoint schedule") {
  CHECK(checkpoint_schedule(1) == std::vector<std::uint64_t>{1});
  CHECK(checkpoint_schedule(8) == std::vector<std::uint64_t>{1, 2, 4, 8});
  CHECK(checkpoint_schedule(10) == std::vector<std::uint64_t>{1, 2, 4, 8, 10});
  CHECK(checkpoint_schedule(0).empty());
}

TEST_CASE("1x1 game") {
  const PayoffMatrix a = validate_matrix({{0.3}});
  const TrialRecord r = tsallis_selfplay(a, 50, RngStream(1));
  CHECK(r.realized_row_counts == std::vector<std::uint64_t>{50});
  CHECK(r.realized_col_counts == std::vector<std::uint64_t>{50});
  CHECK(r.row_loss_profile[0] == doctest::Approx(15.0));
  CHECK(r.col_loss_profile[0] == doctest::Approx(15.0));
  const RegretSummary s = pseudo_regret(r, a);
  CHECK(std::abs(s.reg_row) <= 1e-12);
  CHECK(std::abs(s.reg_col) <= 1e-12);
}

TEST_CASE("run_selfplay rejects bad input") {
  const PayoffMatrix a = gen_example_2x2(0.1);
  TsallisInf row(2), col(3);
  CHECK_THROWS_AS(run_selfplay(a, row, row, 0, std::uint64_t{1}), std::invalid_argument);
  CHECK_THROWS_AS(run_selfplay(a, row, col, 10, std::uint64_t{1}), std::invalid_argument);
  SelfPlayOptions o;
  o.record_trajectory = true;
  CHECK_THROWS_AS(run_selfplay(a, row, row, kMaxTrajectoryHorizon + 1, std::uint64_t{1}, o),
                  std::invalid_argument);
}

TEST_CASE("learner failures carry the round") {
  // A learner whose update throws on round 3.
  struct Faulty final : Learner {
    int calls = 0;
    std::vector<double> x{0.5, 0.5};
    std::string name() const override { return "faulty"; }
    std::size_t num_actions() const override { return 2; }
    std::span<const double> strategy() override { return x; }
    void update(std::size_t, double) override {
      if (++calls == 3) throw std::runtime_error("boom");
    }
  } faulty;
  TsallisInf col(2);
  try {
    run_selfplay(gen_example_2x2(0.1), faulty, col, 10, std::uint64_t{1});
    FAIL("expected TrialError");
  } catch (const TrialError& e) {
    CHECK(e.round() == 3);
  }
}

TEST_CASE("self-play is deterministic") {
  const PayoffMatrix a = gen_example_2x2(0.1);
  const TrialRecord r1 = tsallis_selfplay(a, 1000, RngStream(2024, 5));
  const TrialRecord r2 = tsallis_selfplay(a, 1000, RngStream(2024, 5));
  CHECK(r1 == r2);
  CHECK(r1.stream == 5);
  CHECK(!(r1 == tsallis_selfplay(a, 1000, RngStream(2024, 6))));

  for (const std::string& name : learner_names()) {
    auto rows = [&] {
      auto row = make_learner(name, 2), col = make_learner(name, 2);
      return run_selfplay(a, *row, *col, 500, std::uint64_t{9});
    };
    CHECK(rows() == rows());
  }
}

TEST_CASE("aggregates match a recompute from the trajectory") {
  std::mt19937_64 gen(3);
  for (int k = 0; k < 10; ++k) {
    const std::size_t m = 2 + gen() % 5, n = 2 + gen() % 5;
    const PayoffMatrix a = random_matrix(gen, m, n);
    SelfPlayOptions o;
    o.record_trajectory = true;
    o.independent_feedback = k % 2 == 1;
    const std::uint64_t horizon = 1000;
    const TrialRecord r = tsallis_selfplay(a, horizon, RngStream(k), o);
    REQUIRE(r.trajectory);
    REQUIRE(r.trajectory->size() == horizon);

    std::vector<double> row_profile(m, 0.0), col_profile(n, 0.0), sum_x(m, 0.0);
    std::vector<std::uint64_t> row_counts(m, 0), col_counts(n, 0);
    double payoff = 0;
    for (const RoundRecord& rr : *r.trajectory) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          row_profile[i] += a(i, j) * rr.y[j];
          col_profile[j] += a(i, j) * rr.x[i];
          payoff += rr.x[i] * a(i, j) * rr.y[j];
        }
        sum_x[i] += rr.x[i];
      }
      ++row_counts[rr.row_action];
      ++col_counts[rr.col_action];
      CHECK((rr.row_outcome == 1.0 || rr.row_outcome == -1.0));
      if (!o.independent_feedback) CHECK(rr.row_outcome == rr.col_outcome);
    }
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(std::abs(r.row_loss_profile[i] - row_profile[i]) <= 1e-9);
      CHECK(std::abs(r.avg_x[i] - sum_x[i] / horizon) <= 1e-12);
    }
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(r.col_loss_profile[j] - col_profile[j]) <= 1e-9);
    CHECK(std::abs(r.payoff_sum - payoff) <= 1e-9);
    CHECK(r.realized_row_counts == row_counts);
    CHECK(r.realized_col_counts == col_counts);

    for (const Checkpoint& cp : r.checkpoints) {
      CHECK(cp.x == (*r.trajectory)[cp.t - 1].x);
      CHECK(cp.y == (*r.trajectory)[cp.t - 1].y);
    }
    CHECK(r.checkpoints.back().t == horizon);
    CHECK(r.checkpoints.back().row_mode == identify_psne(r).first);

    // Same seed without the trajectory gives the same aggregates.
    TrialRecord lean = tsallis_selfplay(a, horizon, RngStream(k), {false, o.independent_feedback, true});
    lean.trajectory = r.trajectory;
    CHECK(lean == r);
  }
}

TEST_CASE("trial records satisfy their invariants") {
  std::mt19937_64 gen(12);
  for (const std::string& name : learner_names()) {
    const PayoffMatrix a = random_matrix(gen, 4, 3);
    auto row = make_learner(name, 4), col = make_learner(name, 3);
    const std::uint64_t horizon = 777;
    const TrialRecord r = run_selfplay(a, *row, *col, horizon, std::uint64_t{4});
    std::uint64_t rows = 0, cols = 0;
    for (auto c : r.realized_row_counts) rows += c;
    for (auto c : r.realized_col_counts) cols += c;
    CHECK(rows == horizon);
    CHECK(cols == horizon);
    CHECK_NOTHROW(MixedStrategy(r.avg_x));
    CHECK_NOTHROW(MixedStrategy(r.avg_y));
    for (double v : r.row_loss_profile) CHECK(std::abs(v) <= double(horizon));
  }
}

TEST_CASE("fixed equilibrium players have zero regret") {
  const PayoffMatrix a = gen_example_2x2(0.1);
  FixedStrategyLearner row(MixedStrategy({0.7, 0.3})), col(MixedStrategy({0.1, 0.9}));
  const TrialRecord r = run_selfplay(a, row, col, 10000, std::uint64_t{1});
  const RegretSummary s = pseudo_regret(r, a);
  CHECK(std::abs(s.reg_row) <= 1e-8);
  CHECK(std::abs(s.reg_col) <= 1e-8);
}

TEST_CASE("average-iterate identity") {
  std::mt19937_64 gen(44);
  for (int k = 0; k < 20; ++k) {
    const std::size_t m = 1 + gen() % 6, n = 1 + gen() % 6;
    const PayoffMatrix a = random_matrix(gen, m, n);
    const std::string& name = learner_names()[k % learner_names().size()];
    auto row = make_learner(name, m), col = make_learner("tsallis", n);
    const TrialRecord r = run_selfplay(a, *row, *col, 3000, std::uint64_t(k));
    const RegretSummary s = pseudo_regret(r, a);
    CHECK(std::abs(s.dgap_avg - duality_gap(a, r.avg_x, r.avg_y)) <= 1e-6);
    CHECK(s.dgap_avg >= -1e-12);
  }
}

TEST_CASE("pseudo_regret needs tracked payoffs") {
  const PayoffMatrix a = gen_example_2x2(0.1);
  SelfPlayOptions o;
  o.track_payoffs = false;
  const TrialRecord r = tsallis_selfplay(a, 10, RngStream(1), o);
  CHECK_THROWS_AS(pseudo_regret(r, a), std::invalid_argument);
  CHECK_THROWS_AS(pseudo_regret(tsallis_selfplay(a, 10, RngStream(1)), PayoffMatrix::zeros(3, 2)),
                  std::invalid_argument);
}

TEST_CASE("tsallis self-play regret grows sublinearly") {
  const PayoffMatrix a = gen_example_2x2(0.1);
  auto mean_regret = [&](std::uint64_t horizon) {
    std::vector<double> values;
    for (std::uint64_t k = 0; k < 64; ++k) {
      const RegretSummary s = pseudo_regret(tsallis_selfplay(a, horizon, RngStream(77, k)), a);
      values.push_back(s.reg_row + s.reg_col);
    }
    double sum = 0;
    for (double v : values) sum += v;
    return sum / values.size();
  };
  const double small = mean_regret(25000), large = mean_regret(100000);
  CHECK(oracle::loglog_slope({25000, 100000}, {small, large}) < 0.75);
}

TEST_CASE("last-iterate metrics") {
  const PayoffMatrix a = gen_hard_psne_instance(4, 4, 0.1, 0.2);
  const EquilibriumSolution sol = solve_ne(a);
  REQUIRE(sol.is_pure);

  FixedStrategyLearner row(sol.x_star), col(sol.y_star);
  const TrialRecord at_ne = run_selfplay(a, row, col, 64, std::uint64_t{1});
  for (const LastIteratePoint& p : last_iterate_metrics(at_ne, sol, a)) {
    CHECK(p.valid);
    CHECK(p.bregman_sum == 0.0);
    CHECK(p.dgap == 0.0);
  }

  const TrialRecord r = tsallis_selfplay(a, 4096, RngStream(3));
  const auto series = last_iterate_metrics(r, sol, a);
  CHECK(series.size() == r.checkpoints.size());
  for (const LastIteratePoint& p : series) {
    CHECK(p.valid);
    CHECK(std::isfinite(p.bregman_sum));
    CHECK(p.bregman_sum >= 0.0);
    CHECK(p.dgap >= 0.0);
  }

  FixedStrategyLearner wrong(MixedStrategy::point_mass(4, 2));
  TsallisInf col2(4);
  const TrialRecord off = run_selfplay(a, wrong, col2, 8, std::uint64_t{1});
  CHECK(!last_iterate_metrics(off, sol, a).front().valid);
  CHECK(std::isnan(last_iterate_metrics(off, sol, a).front().bregman_sum));

  const PayoffMatrix mixed = gen_example_2x2(0.1);
  CHECK_THROWS_AS(last_iterate_metrics(tsallis_selfplay(mixed, 8, RngStream(1)), solve_ne(mixed), mixed),
                  std::invalid_argument);
}

TEST_CASE("identify_psne") {
  TrialRecord r;
  r.realized_row_counts = {10, 0, 0};
  r.realized_col_counts = {0, 10};
  CHECK(identify_psne(r) == std::pair<std::size_t, std::size_t>{0, 1});
  r.realized_row_counts = {5, 5};
  r.realized_col_counts = {5, 5};
  CHECK(identify_psne(r) == std::pair<std::size_t, std::size_t>{0, 0});
}

TEST_CASE("boosted identification") {
  const PayoffMatrix a = gen_hard_psne_instance(3, 3, 0.1, 0.1);
  const LearnerFactory tsallis = [](std::size_t k) { return make_learner("tsallis", k); };

  const BoostedIdentification one = boosted_identify(a, tsallis, 300, 1, 5);
  TsallisInf row(3), col(3);
  SelfPlayOptions o;
  o.track_payoffs = false;
  CHECK(one.identified == identify_psne(run_selfplay(a, row, col, 300, RngStream(5, 0), o)));

  // Unanimous fixed players.
  const LearnerFactory fixed = [](std::size_t k) {
    return std::make_unique<FixedStrategyLearner>(MixedStrategy::point_mass(k, 2));
  };
  const BoostedIdentification all = boosted_identify(a, fixed, 20, 7, 1);
  CHECK(all.identified == std::pair<std::size_t, std::size_t>{2, 2});
  CHECK(all.votes.size() == 7);

  // Parallel schedule does not matter.
  CHECK(boosted_identify(a, tsallis, 500, 9, 3, 1).votes == boosted_identify(a, tsallis, 500, 9, 3, 4).votes);

  // Majority over 15 trials beats a single trial.
  const std::uint64_t horizon = 2048;
  const auto single = boosted_identify(a, tsallis, horizon, 300, 100);
  int single_wrong = 0;
  for (const auto& v : single.votes) single_wrong += v != std::pair<std::size_t, std::size_t>{0, 0};
  const double single_error = single_wrong / 300.0;
  CHECK(single_error <= 0.25);
  int boosted_wrong = 0;
  constexpr int kReps = 40;
  for (int rep = 0; rep < kReps; ++rep) {
    boosted_wrong += boosted_identify(a, tsallis, horizon, 15, 1000 + rep).identified !=
                     std::pair<std::size_t, std::size_t>{0, 0};
  }
  CHECK(boosted_wrong / double(kReps) < single_error);
  CHECK_THROWS_AS(boosted_identify(a, tsallis, horizon, 0, 1), std::invalid_argument);
}
