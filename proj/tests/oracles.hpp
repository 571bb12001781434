#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

/// Tsallis FTRL step by plain bisection on lambda in long double.
inline std::vector<double> ftrl_bisection(const std::vector<double>& loss, double eta) {
  const std::size_t m = loss.size();
  const long double min_l = *std::min_element(loss.begin(), loss.end());
  const long double e = eta;
  auto mass = [&](long double lambda) {
    long double s = 0;
    for (double l : loss) {
      const long double d = e * (l + lambda);
      s += 1.0L / (d * d);
    }
    return s;
  };
  long double lo = -min_l + 1.0L / e;
  long double hi = -min_l + std::sqrt(static_cast<long double>(m)) / e;
  for (int it = 0; it < 400 && hi - lo > 0; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mass(mid) > 1.0L ? lo : hi) = mid;
  }
  const long double lambda = 0.5L * (lo + hi);
  std::vector<double> x(m);
  long double sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const long double d = e * (loss[i] + lambda);
    x[i] = static_cast<double>(1.0L / (d * d));
    sum += x[i];
  }
  for (double& v : x) v = static_cast<double>(v / sum);
  return x;
}

/// Solves the square system M z = b by Gaussian elimination with partial
/// pivoting; nullopt if singular.
inline std::optional<std::vector<long double>> solve_linear(std::vector<std::vector<long double>> mat,
                                                            std::vector<long double> b) {
  const std::size_t k = b.size();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::fabs(mat[r][c]) > std::fabs(mat[piv][c])) piv = r;
    }
    if (std::fabs(mat[piv][c]) < 1e-12L) return std::nullopt;
    std::swap(mat[piv], mat[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const long double f = mat[r][c] / mat[c][c];
      for (std::size_t cc = c; cc < k; ++cc) mat[r][cc] -= f * mat[c][cc];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = 0; c < k; ++c) b[c] /= mat[c][c];
  return b;
}

struct Equilibrium {
  std::vector<double> x;
  std::vector<double> y;
  double value = 0.0;
};

/// Support enumeration over equal-size support pairs. Correct for
/// nondegenerate games (random continuous entries are nondegenerate a.s.).
/// `a` is row-major m x n.
inline std::optional<Equilibrium> support_enumeration(const std::vector<double>& a, std::size_t m,
                                                      std::size_t n) {
  auto entry = [&](std::size_t i, std::size_t j) { return static_cast<long double>(a[i * n + j]); };
  const long double tol = 1e-10L;
  for (std::size_t k = 1; k <= std::min(m, n); ++k) {
    for (unsigned rows = 0; rows < (1u << m); ++rows) {
      if (static_cast<std::size_t>(__builtin_popcount(rows)) != k) continue;
      for (unsigned cols = 0; cols < (1u << n); ++cols) {
        if (static_cast<std::size_t>(__builtin_popcount(cols)) != k) continue;
        std::vector<std::size_t> rs, cs;
        for (std::size_t i = 0; i < m; ++i) if (rows >> i & 1u) rs.push_back(i);
        for (std::size_t j = 0; j < n; ++j) if (cols >> j & 1u) cs.push_back(j);
        // x on rs makes the column player indifferent across cs; unknowns (x_rs, v).
        std::vector<std::vector<long double>> mx(k + 1, std::vector<long double>(k + 1, 0));
        std::vector<long double> bx(k + 1, 0);
        for (std::size_t c = 0; c < k; ++c) {
          for (std::size_t r = 0; r < k; ++r) mx[c][r] = entry(rs[r], cs[c]);
          mx[c][k] = -1;
        }
        for (std::size_t r = 0; r < k; ++r) mx[k][r] = 1;
        bx[k] = 1;
        auto zx = solve_linear(mx, bx);
        std::vector<std::vector<long double>> my(k + 1, std::vector<long double>(k + 1, 0));
        std::vector<long double> by(k + 1, 0);
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t c = 0; c < k; ++c) my[r][c] = entry(rs[r], cs[c]);
          my[r][k] = -1;
        }
        for (std::size_t c = 0; c < k; ++c) my[k][c] = 1;
        by[k] = 1;
        auto zy = solve_linear(my, by);
        if (!zx || !zy) continue;
        std::vector<long double> x(m, 0), y(n, 0);
        bool ok = true;
        for (std::size_t r = 0; r < k; ++r) {
          x[rs[r]] = (*zx)[r];
          ok = ok && (*zx)[r] >= -tol;
        }
        for (std::size_t c = 0; c < k; ++c) {
          y[cs[c]] = (*zy)[c];
          ok = ok && (*zy)[c] >= -tol;
        }
        if (!ok) continue;
        const long double v = (*zx)[k];
        for (std::size_t j = 0; j < n && ok; ++j) {
          long double s = 0;
          for (std::size_t i = 0; i < m; ++i) s += x[i] * entry(i, j);
          ok = s >= v - 1e-9L;
        }
        for (std::size_t i = 0; i < m && ok; ++i) {
          long double s = 0;
          for (std::size_t j = 0; j < n; ++j) s += entry(i, j) * y[j];
          ok = s <= v + 1e-9L;
        }
        if (!ok) continue;
        Equilibrium eq;
        for (long double v_i : x) eq.x.push_back(static_cast<double>(std::max(v_i, 0.0L)));
        for (long double v_j : y) eq.y.push_back(static_cast<double>(std::max(v_j, 0.0L)));
        eq.value = static_cast<double>(v);
        return eq;
      }
    }
  }
  return std::nullopt;
}

/// max_i (A y)(i) - min_j (A^T x)(j), recomputed from scratch.
inline double duality_gap(const std::vector<double>& a, std::size_t m, std::size_t n,
                          const std::vector<double>& x, const std::vector<double>& y) {
  long double best_row = -std::numeric_limits<long double>::infinity();
  long double best_col = std::numeric_limits<long double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    long double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * static_cast<long double>(y[j]);
    best_row = std::max(best_row, s);
  }
  for (std::size_t j = 0; j < n; ++j) {
    long double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += a[i * n + j] * static_cast<long double>(x[i]);
    best_col = std::min(best_col, s);
  }
  return static_cast<double>(best_row - best_col);
}

/// OLS slope of log10(v) on log10(t); used to cross-check fit_loglog_slope.
inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& v) {
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const long double k = static_cast<long double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const long double lx = std::log10(static_cast<long double>(t[i]));
    const long double ly = std::log10(static_cast<long double>(v[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return static_cast<double>((k * sxy - sx * sy) / (k * sxx - sx * sx));
}

}  // namespace oracle
