#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "banditgame/game.hpp"
#include "banditgame/rng.hpp"

using namespace banditgame;

namespace {

RngStream::Block philox_of(RngStream::Block ctr, RngStream::Key key) { return RngStream::philox(ctr, key); }

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox_of({0, 0, 0, 0}, {0, 0}) ==
        RngStream::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox_of({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        RngStream::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox_of({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        RngStream::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42), b(42), c(43), d(42, 1);
  bool differs_seed = false, differs_stream = false;
  for (int k = 0; k < 1000; ++k) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differs_seed |= va != c.next_u64();
    differs_stream |= va != d.next_u64();
  }
  CHECK(differs_seed);
  CHECK(differs_stream);
  CHECK(a.position() == 2000);

  RngStream u(7);
  for (int k = 0; k < 10000; ++k) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
  CHECK(RngStream(5).derive(9).stream() == 9);
  CHECK(RngStream(5).derive(9).seed() == 5);
}

TEST_CASE("validate_matrix") {
  CHECK(validate_matrix({{0, 0}, {0, 0}}) == PayoffMatrix::zeros(2, 2));
  const PayoffMatrix a = validate_matrix({{0, 0.3}, {0.9, 0.2}});
  CHECK(a(1, 0) == 0.9);
  try {
    validate_matrix({{0, 1.5}, {0, 0}});
    FAIL("expected EntryOutOfRange");
  } catch (const EntryOutOfRange& e) {
    CHECK(e.row() == 0);
    CHECK(e.col() == 1);
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
  CHECK_THROWS_AS(validate_matrix({{0, 0}, {0}}), std::invalid_argument);
  CHECK_THROWS_AS(validate_matrix({}), std::invalid_argument);
  CHECK_THROWS_AS(validate_matrix({{std::nan("")}}), EntryOutOfRange);
}

TEST_CASE("matrix text format") {
  std::istringstream good("2 3\n0 0.5 -1\n\n1 0.25 0\n");
  const PayoffMatrix a = parse_matrix(good);
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a(1, 1) == 0.25);

  std::ostringstream out;
  write_matrix(out, a);
  std::istringstream back(out.str());
  CHECK(parse_matrix(back) == a);

  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_matrix(in);
    } catch (const MatrixParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("2 2\n0 0\n0 x\n") == 3);
  CHECK(line_of("2 2\n0 0 0\n0 0\n") == 2);
  CHECK(line_of("two 2\n") == 1);
  CHECK(line_of("2 2\n0 0\n0 2\n") == 3);
  CHECK(line_of("2 2\n0 0\n") == 3);
  CHECK(line_of("1 1\n0\n5\n") == 3);
}

TEST_CASE("mixed strategy tolerance") {
  const MixedStrategy s({0.25, 0.75 + 5e-10});
  CHECK(s[0] + s[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(MixedStrategy({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(MixedStrategy({1.1, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(MixedStrategy({}), std::invalid_argument);
  CHECK(MixedStrategy::uniform(4)[3] == 0.25);
  CHECK(MixedStrategy::point_mass(3, 2)[2] == 1.0);
}

TEST_CASE("sample_action point masses") {
  RngStream rng(1);
  for (int k = 0; k < 1000; ++k) {
    CHECK(sample_action(MixedStrategy({1, 0, 0}), rng) == 0);
    CHECK(sample_action(MixedStrategy({0, 1}), rng) == 1);
  }
}

TEST_CASE("sample_action frequencies") {
  constexpr int kN = 100000;
  RngStream rng(2024);
  int zeros = 0;
  for (int k = 0; k < kN; ++k) zeros += sample_action(MixedStrategy({0.5, 0.5}), rng) == 0;
  CHECK(std::abs(zeros / double(kN) - 0.5) <= 0.01);

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t m : {2u, 5u, 10u}) {
    std::vector<double> p(m);
    double sum = 0;
    for (double& v : p) sum += v = unif(gen);
    for (double& v : p) v /= sum;
    const MixedStrategy s(p);
    std::vector<int> hits(m, 0);
    for (int k = 0; k < kN; ++k) {
      const std::size_t i = sample_action(s, rng);
      REQUIRE(i < m);
      ++hits[i];
    }
    const double bound = 3.0 * std::sqrt(std::log(2.0 * m) / kN);
    for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(hits[i] / double(kN) - s[i]) <= bound);
  }
}

TEST_CASE("sample_outcome") {
  constexpr int kN = 100000;
  RngStream rng(99);
  for (int k = 0; k < 1000; ++k) {
    CHECK(sample_outcome(1.0, rng) == 1.0);
    CHECK(sample_outcome(-1.0, rng) == -1.0);
  }
  for (double a : {0.0, 0.3, -0.7}) {
    double sum = 0;
    for (int k = 0; k < kN; ++k) {
      const double r = sample_outcome(a, rng);
      REQUIRE((r == 1.0 || r == -1.0));
      sum += r;
    }
    CHECK(std::abs(sum / kN - a) <= 3.0 / std::sqrt(double(kN)));
    if (a == 0.0) CHECK(std::abs(sum / kN) <= 0.02);
  }
  CHECK_THROWS_AS(sample_outcome(1.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_outcome(-1.01, rng), std::invalid_argument);
}

TEST_CASE("sampling is deterministic in the seed") {
  auto draw = [](std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<double> out;
    const MixedStrategy s({0.2, 0.3, 0.5});
    for (int k = 0; k < 500; ++k) {
      out.push_back(static_cast<double>(sample_action(s, rng)));
      out.push_back(sample_outcome(0.1, rng));
    }
    return out;
  };
  CHECK(draw(3) == draw(3));
  CHECK(draw(3) != draw(4));
}

TEST_CASE("matrix products") {
  const PayoffMatrix a = validate_matrix({{0, 0.3}, {0.9, 0.2}});
  std::vector<double> ay(2), atx(2);
  const std::vector<double> x{0.7, 0.3}, y{0.1, 0.9};
  a.multiply(y, ay);
  a.multiply_transposed(x, atx);
  CHECK(ay[0] == doctest::Approx(0.27));
  CHECK(ay[1] == doctest::Approx(0.27));
  CHECK(atx[0] == doctest::Approx(0.27));
  CHECK(a.bilinear(x, y) == doctest::Approx(0.27));
}
