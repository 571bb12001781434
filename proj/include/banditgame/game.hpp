#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "banditgame/rng.hpp"

namespace banditgame {

/// Absolute tolerance on |sum(p) - 1| for a probability vector.
inline constexpr double kSimplexTolerance = 1e-9;

/// Entry (row, col) of a payoff matrix lies outside [-1, 1].
class EntryOutOfRange : public std::invalid_argument {
 public:
  EntryOutOfRange(std::size_t row, std::size_t col, double value);
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Matrix text could not be parsed; `line()` is 1-based.
class MatrixParseError : public std::runtime_error {
 public:
  MatrixParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Zero-sum game A in [-1, 1]^{m x n}: A(i, j) is the row player's expected
/// reward and the column player's expected loss. Stored row-major.
class PayoffMatrix {
 public:
  /// Validates shape and range; throws EntryOutOfRange or std::invalid_argument.
  PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static PayoffMatrix zeros(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }
  std::span<const double> entries() const { return entries_; }

  /// out = A y (length rows()).
  void multiply(std::span<const double> y, std::span<double> out) const;
  /// out = A^T x (length cols()).
  void multiply_transposed(std::span<const double> x, std::span<double> out) const;
  /// x^T A y.
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  bool operator==(const PayoffMatrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

/// Builds a PayoffMatrix from nested rows; rejects ragged or empty input.
PayoffMatrix validate_matrix(const std::vector<std::vector<double>>& rows);

/// Plain-text format: first line "m n", then m lines of n decimals.
PayoffMatrix parse_matrix(std::istream& in);
PayoffMatrix load_matrix(const std::string& path);
void write_matrix(std::ostream& out, const PayoffMatrix& matrix);

/// Probability vector. Inputs within kSimplexTolerance of the simplex are
/// renormalized by their sum; anything else is rejected.
class MixedStrategy {
 public:
  explicit MixedStrategy(std::vector<double> probs);

  static MixedStrategy uniform(std::size_t n);
  static MixedStrategy point_mass(std::size_t n, std::size_t index);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const MixedStrategy&) const = default;

 private:
  std::vector<double> probs_;
};

/// Inverse-CDF draw of an index with probability probs[i]. Consumes one uniform.
std::size_t sample_action(std::span<const double> probs, RngStream& rng);
inline std::size_t sample_action(const MixedStrategy& strategy, RngStream& rng) {
  return sample_action(strategy.probs(), rng);
}

/// Ber±(a): +1 with probability (1 + a) / 2, otherwise -1.
double sample_outcome(double mean, RngStream& rng);

}  // namespace banditgame
