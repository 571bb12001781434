#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "banditgame/game.hpp"

namespace banditgame {

/// x_star(i) above this threshold puts i in the support.
inline constexpr double kSupportThreshold = 1e-8;
/// Non-support gaps at or below this are treated as degenerate.
inline constexpr double kDegenerateGap = 1e-12;

class LpCyclingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EquilibriumSolution {
  MixedStrategy x_star;
  MixedStrategy y_star;
  double value = 0.0;
  std::vector<std::size_t> support_rows;
  std::vector<std::size_t> support_cols;
  bool is_pure = false;
  int pivots = 0;
};

/// Solves the matrix game with a dense tableau simplex (Bland's rule).
///
/// The column player's LP  max 1'w  s.t. (A + 2) w <= 1, w >= 0  is solved
/// directly; the row player's strategy is read off the slack reduced costs
/// of the final tableau (LP duality). The +2 shift makes every entry
/// positive and is removed from the reported value.
EquilibriumSolution solve_ne(const PayoffMatrix& a);

/// max_i (A y)(i) - min_j (A^T x)(j).
double duality_gap(const PayoffMatrix& a, std::span<const double> x, std::span<const double> y);
inline double duality_gap(const PayoffMatrix& a, const MixedStrategy& x, const MixedStrategy& y) {
  return duality_gap(a, x.probs(), y.probs());
}

/// Bregman divergence of the 1/2-Tsallis regularizer,
/// D(target, base) = sum_i (sqrt(target_i) - sqrt(base_i))^2 / sqrt(base_i).
/// Coordinates with target_i = base_i = 0 contribute 0; base_i = 0 < target_i
/// is rejected.
double bregman_half_tsallis(std::span<const double> target, std::span<const double> base);
inline double bregman_half_tsallis(const MixedStrategy& target, const MixedStrategy& base) {
  return bregman_half_tsallis(target.probs(), base.probs());
}

/// Gap vectors and derived difficulty measures at a given equilibrium.
struct InstanceConstants {
  std::vector<double> delta;        ///< v 1 - A y*, zero on the row support
  std::vector<double> delta_prime;  ///< A^T x* - v 1, zero on the column support
  double omega = 0.0;               ///< sum of 1 / delta over non-support rows
  double omega_prime = 0.0;
  double gamma = 0.0;  ///< sum_i sqrt(x*_i) - 1, at the supplied equilibrium
  double gamma_prime = 0.0;
  double delta_min = 0.0;  ///< smallest non-support gap on either side
  double opt = 0.0;        ///< sum of 1 / delta^2 over non-support actions, both sides
  /// Some non-support gap is <= kDegenerateGap; omega/opt are +infinity.
  bool degenerate = false;
};

InstanceConstants instance_constants(const PayoffMatrix& a, const EquilibriumSolution& sol);

/// [[0, 3 eps], [1 - eps, 2 eps]] for 0 < eps < 1/3; unique NE
/// x* = (1 - 3 eps, 3 eps), y* = (eps, 1 - eps).
PayoffMatrix gen_example_2x2(double epsilon);

/// Hard PSNE instance with the equilibrium at (0, 0): first row
/// (0, 2 d_min, 2 d_1, ...), first column (0, -2 d_min, -2 d_1, ...), and the
/// lower-right block 0 on the diagonal, +1 above and -1 below.
PayoffMatrix gen_hard_psne_instance(std::size_t m, std::size_t n, double d_min, double d_1);

/// A(i, j) = delta_prime(j) - delta(i); each gap in [0, 1/4] with at least
/// one zero per side, so the zero coordinates form a PSNE.
PayoffMatrix gen_lower_bound_instance(std::span<const double> delta, std::span<const double> delta_prime);

/// Analytic OPT of the hard instance: 1 / (2 d_min^2) + (m - 2) / (2 d_1^2) for m = n.
double hard_instance_opt(std::size_t m, std::size_t n, double d_min, double d_1);

}  // namespace banditgame
