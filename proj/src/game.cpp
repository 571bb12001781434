#include "banditgame/game.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace banditgame {

namespace {

std::string describe_entry(std::size_t row, std::size_t col, double value) {
  std::ostringstream os;
  os << "payoff entry (" << row << "," << col << ") = " << value << " is outside [-1, 1]";
  return os.str();
}

std::string describe_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

EntryOutOfRange::EntryOutOfRange(std::size_t row, std::size_t col, double value)
    : std::invalid_argument(describe_entry(row, col, value)), row_(row), col_(col) {}

MatrixParseError::MatrixParseError(std::size_t line, const std::string& what)
    : std::runtime_error(describe_line(line, what)), line_(line) {}

PayoffMatrix::PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("payoff matrix must be at least 1x1");
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("payoff matrix has " + std::to_string(entries_.size()) +
                                " entries, expected " + std::to_string(rows_ * cols_));
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const double a = entries_[i * cols_ + j];
      if (!(a >= -1.0 && a <= 1.0)) throw EntryOutOfRange(i, j, a);
    }
  }
}

PayoffMatrix PayoffMatrix::zeros(std::size_t rows, std::size_t cols) {
  return PayoffMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

void PayoffMatrix::multiply(std::span<const double> y, std::span<double> out) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* a = entries_.data() + i * cols_;
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += a[j] * y[j];
    out[i] = s;
  }
}

void PayoffMatrix::multiply_transposed(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < cols_; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* a = entries_.data() + i * cols_;
    const double xi = x[i];
    for (std::size_t j = 0; j < cols_; ++j) out[j] += xi * a[j];
  }
}

double PayoffMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  double total = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* a = entries_.data() + i * cols_;
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += a[j] * y[j];
    total += x[i] * s;
  }
  return total;
}

PayoffMatrix validate_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw std::invalid_argument("payoff matrix is empty");
  const std::size_t cols = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw std::invalid_argument("ragged payoff matrix: row " + std::to_string(i) + " has " +
                                  std::to_string(rows[i].size()) + " entries, expected " +
                                  std::to_string(cols));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return PayoffMatrix(rows.size(), cols, std::move(flat));
}

PayoffMatrix parse_matrix(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& out) {
    // Blank lines are skipped.
    while (std::getline(in, out)) {
      ++line_no;
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line(text)) throw MatrixParseError(line_no + 1, "missing header \"m n\"");
  std::istringstream header(text);
  long long m = 0, n = 0;
  std::string extra;
  if (!(header >> m >> n) || (header >> extra) || m <= 0 || n <= 0) {
    throw MatrixParseError(line_no, "header must be two positive integers \"m n\"");
  }

  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(m * n));
  for (long long i = 0; i < m; ++i) {
    if (!next_line(text)) {
      throw MatrixParseError(line_no + 1, "expected " + std::to_string(m) + " rows, found " +
                                              std::to_string(i));
    }
    std::istringstream row(text);
    std::string token;
    long long count = 0;
    while (row >> token) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(value)) {
        throw MatrixParseError(line_no, "not a number: \"" + token + "\"");
      }
      if (value < -1.0 || value > 1.0) {
        throw MatrixParseError(line_no, "entry (" + std::to_string(i) + "," +
                                            std::to_string(count) + ") = " + token +
                                            " is outside [-1, 1]");
      }
      entries.push_back(value);
      ++count;
    }
    if (count != n) {
      throw MatrixParseError(line_no, "expected " + std::to_string(n) + " entries, found " +
                                          std::to_string(count));
    }
  }
  if (next_line(text)) throw MatrixParseError(line_no, "unexpected trailing content");
  return PayoffMatrix(static_cast<std::size_t>(m), static_cast<std::size_t>(n), std::move(entries));
}

PayoffMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  return parse_matrix(in);
}

void write_matrix(std::ostream& out, const PayoffMatrix& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) out << (j ? " " : "") << matrix(i, j);
    out << '\n';
  }
}

MixedStrategy::MixedStrategy(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("mixed strategy must have at least one action");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
      throw std::invalid_argument("mixed strategy coordinate " + std::to_string(i) +
                                  " is negative or non-finite");
    }
    sum += probs_[i];
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream os;
    os << std::setprecision(17) << "mixed strategy sums to " << sum << ", not 1";
    throw std::invalid_argument(os.str());
  }
  for (double& p : probs_) p /= sum;
}

MixedStrategy MixedStrategy::uniform(std::size_t n) {
  return MixedStrategy(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

MixedStrategy MixedStrategy::point_mass(std::size_t n, std::size_t index) {
  if (index >= n) throw std::invalid_argument("point mass index out of range");
  std::vector<double> p(n, 0.0);
  p[index] = 1.0;
  return MixedStrategy(std::move(p));
}

std::size_t sample_action(std::span<const double> probs, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  // Rounding left the CDF just below 1.
  return last_positive;
}

double sample_outcome(double mean, RngStream& rng) {
  if (!(mean >= -1.0 && mean <= 1.0)) {
    throw std::invalid_argument("outcome mean " + std::to_string(mean) + " is outside [-1, 1]");
  }
  return rng.uniform() < 0.5 * (1.0 + mean) ? 1.0 : -1.0;
}

}  // namespace banditgame
