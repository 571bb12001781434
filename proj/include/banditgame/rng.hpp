#pragma once

#include <array>
#include <cstdint>

namespace banditgame {

/// Counter-based random stream built on Philox4x32-10 (Salmon, Moraes,
/// Dror, Shaw; "Parallel random numbers: as easy as 1, 2, 3", SC'11).
///
/// A stream is identified by a 64-bit `seed` (the Philox key) and a 64-bit
/// `stream` id (the upper half of the 128-bit counter). The lower half of
/// the counter is the block index inside the stream. Two streams that
/// differ in either seed or stream id never share a counter value, so
/// per-trial streams derived from (master seed, trial index) are independent
/// by construction and need no sequential seeding.
///
/// Output is a pure function of (seed, stream, draw index); it does not
/// depend on platform, compiler, or thread schedule.
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "philox4x32-10";
  static constexpr int kAlgorithmVersion = 1;

  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// Raw Philox4x32-10 bijection. Exposed for known-answer tests.
  static Block philox(Block counter, Key key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Child stream for (this seed, `stream`); does not consume draws.
  RngStream derive(std::uint64_t stream) const { return RngStream(seed_, stream); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  /// Number of 32-bit words consumed so far.
  std::uint64_t position() const { return block_ * 4 - static_cast<std::uint64_t>(available_); }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int available_ = 0;
};

}  // namespace banditgame
