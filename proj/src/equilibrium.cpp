#include "banditgame/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace banditgame {

namespace {

constexpr double kPayoffShift = 2.0;
constexpr double kPivotEps = 1e-11;

/// Dense tableau for  max sum(w)  s.t.  B w <= 1, w >= 0  with B > 0.
class Tableau {
 public:
  Tableau(const PayoffMatrix& a)
      : rows_(a.rows()), vars_(a.cols() + a.rows()), width_(vars_ + 1),
        cells_((rows_ + 1) * width_, 0.0), basis_(rows_) {
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < n; ++j) at(i, j) = a(i, j) + kPayoffShift;
      at(i, n + i) = 1.0;
      at(i, vars_) = 1.0;
      basis_[i] = n + i;
    }
    for (std::size_t j = 0; j < n; ++j) at(rows_, j) = -1.0;
  }

  /// Runs Bland's rule to optimality; returns the pivot count.
  int optimize(int max_pivots) {
    int pivots = 0;
    for (;;) {
      std::size_t entering = vars_;
      for (std::size_t j = 0; j < vars_; ++j) {
        if (at(rows_, j) < -kPivotEps) {
          entering = j;
          break;
        }
      }
      if (entering == vars_) return pivots;

      std::size_t leaving = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        const double coef = at(i, entering);
        if (coef <= kPivotEps) continue;
        const double ratio = at(i, vars_) / coef;
        const bool better = leaving == rows_ || ratio < best_ratio - kPivotEps;
        const bool tie = !better && ratio <= best_ratio + kPivotEps && basis_[i] < basis_[leaving];
        if (better || tie) {
          best_ratio = std::min(best_ratio, ratio);
          leaving = i;
        }
      }
      // B > 0 keeps every column bounded, so a leaving row always exists.
      if (leaving == rows_) throw LpCyclingError("simplex found an unbounded column; payoff shift is broken");
      pivot(leaving, entering);
      if (++pivots > max_pivots) {
        throw LpCyclingError("simplex exceeded " + std::to_string(max_pivots) + " pivots");
      }
    }
  }

  double objective() const { return at(rows_, vars_); }
  double reduced_cost(std::size_t j) const { return at(rows_, j); }
  std::size_t basic_var(std::size_t i) const { return basis_[i]; }
  double rhs(std::size_t i) const { return at(i, vars_); }

 private:
  double& at(std::size_t i, std::size_t j) { return cells_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return cells_[i * width_ + j]; }

  void pivot(std::size_t row, std::size_t col) {
    double* pr = &cells_[row * width_];
    const double inv = 1.0 / pr[col];
    for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
    pr[col] = 1.0;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      double* ri = &cells_[i * width_];
      const double factor = ri[col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) ri[j] -= factor * pr[j];
      ri[col] = 0.0;
    }
    basis_[row] = col;
  }

  std::size_t rows_;
  std::size_t vars_;
  std::size_t width_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
};

std::vector<double> clean_simplex(std::vector<double> v) {
  double sum = 0.0;
  for (double& p : v) {
    if (p < 0.0) p = 0.0;
    sum += p;
  }
  for (double& p : v) p /= sum;
  return v;
}

std::vector<std::size_t> support_of(const MixedStrategy& s) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > kSupportThreshold) support.push_back(i);
  }
  return support;
}

void check_gap_vector(std::span<const double> gaps, const char* name) {
  bool has_zero = false;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] >= 0.0 && gaps[i] <= 0.25)) {
      throw std::invalid_argument(std::string(name) + "[" + std::to_string(i) + "] = " +
                                  std::to_string(gaps[i]) + " is outside [0, 1/4]");
    }
    has_zero = has_zero || gaps[i] == 0.0;
  }
  if (gaps.empty() || !has_zero) {
    throw std::invalid_argument(std::string(name) + " must be nonempty with at least one zero entry");
  }
}

}  // namespace

EquilibriumSolution solve_ne(const PayoffMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Tableau tableau(a);
  const int max_pivots = 1000 * static_cast<int>(m + n) + 10000;
  const int pivots = tableau.optimize(max_pivots);

  const double total = tableau.objective();  // = 1 / (value + shift)
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tableau.basic_var(i) < n) w[tableau.basic_var(i)] = tableau.rhs(i);
  }
  std::vector<double> u(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) u[i] = tableau.reduced_cost(n + i);

  MixedStrategy x(clean_simplex(std::move(u)));
  MixedStrategy y(clean_simplex(std::move(w)));
  EquilibriumSolution sol{std::move(x), std::move(y), 1.0 / total - kPayoffShift, {}, {}, false, pivots};
  sol.support_rows = support_of(sol.x_star);
  sol.support_cols = support_of(sol.y_star);
  sol.is_pure = sol.support_rows.size() == 1 && sol.support_cols.size() == 1;
  return sol;
}

double duality_gap(const PayoffMatrix& a, std::span<const double> x, std::span<const double> y) {
  if (x.size() != a.rows() || y.size() != a.cols()) {
    throw std::invalid_argument("duality_gap: strategy dimensions do not match the matrix");
  }
  std::vector<double> ay(a.rows());
  std::vector<double> atx(a.cols());
  a.multiply(y, ay);
  a.multiply_transposed(x, atx);
  const double best_row = *std::max_element(ay.begin(), ay.end());
  const double best_col = *std::min_element(atx.begin(), atx.end());
  return std::max(0.0, best_row - best_col);
}

double bregman_half_tsallis(std::span<const double> target, std::span<const double> base) {
  if (target.size() != base.size()) throw std::invalid_argument("bregman: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!(base[i] > 0.0)) {
      if (target[i] == 0.0) continue;  // (sqrt t - sqrt b)^2 / sqrt b -> 0 along t = b
      throw std::invalid_argument("bregman: base coordinate " + std::to_string(i) +
                                  " is zero; divergence undefined");
    }
    const double root_base = std::sqrt(base[i]);
    const double diff = std::sqrt(target[i]) - root_base;
    total += diff * diff / root_base;
  }
  return total;
}

InstanceConstants instance_constants(const PayoffMatrix& a, const EquilibriumSolution& sol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (sol.x_star.size() != m || sol.y_star.size() != n) {
    throw std::invalid_argument("instance_constants: solution does not match the matrix");
  }
  const double v = a.bilinear(sol.x_star.probs(), sol.y_star.probs());

  InstanceConstants c;
  c.delta.assign(m, 0.0);
  c.delta_prime.assign(n, 0.0);
  std::vector<double> ay(m), atx(n);
  a.multiply(sol.y_star.probs(), ay);
  a.multiply_transposed(sol.x_star.probs(), atx);

  std::vector<bool> in_rows(m, false), in_cols(n, false);
  for (std::size_t i : sol.support_rows) in_rows[i] = true;
  for (std::size_t j : sol.support_cols) in_cols[j] = true;

  c.delta_min = std::numeric_limits<double>::infinity();
  auto accumulate = [&](double gap, double& omega) {
    if (gap <= kDegenerateGap) {
      c.degenerate = true;
      return;
    }
    omega += 1.0 / gap;
    c.opt += 1.0 / (gap * gap);
    c.delta_min = std::min(c.delta_min, gap);
  };
  for (std::size_t i = 0; i < m; ++i) {
    if (in_rows[i]) continue;
    c.delta[i] = v - ay[i];
    accumulate(c.delta[i], c.omega);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (in_cols[j]) continue;
    c.delta_prime[j] = atx[j] - v;
    accumulate(c.delta_prime[j], c.omega_prime);
  }
  if (c.degenerate) {
    c.omega = c.omega_prime = c.opt = std::numeric_limits<double>::infinity();
  }

  for (double p : sol.x_star.probs()) c.gamma += std::sqrt(p);
  for (double p : sol.y_star.probs()) c.gamma_prime += std::sqrt(p);
  c.gamma = std::max(0.0, c.gamma - 1.0);
  c.gamma_prime = std::max(0.0, c.gamma_prime - 1.0);
  return c;
}

PayoffMatrix gen_example_2x2(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0 / 3.0)) {
    throw std::invalid_argument("example2x2 needs 0 < eps < 1/3, got " + std::to_string(epsilon));
  }
  return PayoffMatrix(2, 2, {0.0, 3.0 * epsilon, 1.0 - epsilon, 2.0 * epsilon});
}

PayoffMatrix gen_hard_psne_instance(std::size_t m, std::size_t n, double d_min, double d_1) {
  if (m < 3 || n < 3) throw std::invalid_argument("hard PSNE instance needs m, n >= 3");
  if (!(d_min > 0.0) || !(d_1 > 0.0)) throw std::invalid_argument("hard PSNE instance needs positive gaps");
  if (!(2.0 * d_1 <= 1.0)) throw std::invalid_argument("hard PSNE instance needs 2 d_1 <= 1");
  if (!(d_min <= d_1)) throw std::invalid_argument("hard PSNE instance needs d_min <= d_1");

  std::vector<double> e(m * n, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return e[i * n + j]; };
  at(0, 1) = 2.0 * d_min;
  at(1, 0) = -2.0 * d_min;
  for (std::size_t j = 2; j < n; ++j) at(0, j) = 2.0 * d_1;
  for (std::size_t i = 2; i < m; ++i) at(i, 0) = -2.0 * d_1;
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 1; j < n; ++j) at(i, j) = i < j ? 1.0 : (i > j ? -1.0 : 0.0);
  }
  return PayoffMatrix(m, n, std::move(e));
}

PayoffMatrix gen_lower_bound_instance(std::span<const double> delta, std::span<const double> delta_prime) {
  check_gap_vector(delta, "delta");
  check_gap_vector(delta_prime, "delta_prime");
  const std::size_t m = delta.size();
  const std::size_t n = delta_prime.size();
  std::vector<double> e(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) e[i * n + j] = delta_prime[j] - delta[i];
  }
  return PayoffMatrix(m, n, std::move(e));
}

double hard_instance_opt(std::size_t m, std::size_t n, double d_min, double d_1) {
  const double small = 2.0 * d_min;
  const double large = 2.0 * d_1;
  return 2.0 / (small * small) + static_cast<double>(m + n - 4) / (large * large);
}

}  // namespace banditgame
