// Counter-based random streams.
//
// Every draw is a pure function of (master_seed, stream, counter), so a trial
// can be replayed on any thread and results never depend on scheduling.
#pragma once

#include <array>
#include <cstdint>

namespace rtlab {

/// Philox4x32-10 block cipher used as a counter-based generator.
///
/// The 64-bit master seed is the key, the 128-bit counter is split into a
/// 64-bit stream index (trial) and a 64-bit draw counter.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        stream_(stream) {}

  std::uint64_t next_u64() {
    if (buffered_ == 0) {
      refill();
    }
    --buffered_;
    return buffer_[buffered_];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n >= 1, without modulo bias.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - n + 1) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(r) * n;
      if (static_cast<std::uint64_t>(m) >= limit) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t stream() const { return stream_; }
  /// Number of 128-bit blocks consumed so far.
  std::uint64_t counter() const { return counter_; }

 private:
  void refill() {
    std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    ++counter_;
    buffer_[0] = (std::uint64_t{ctr[1]} << 32) | ctr[0];
    buffer_[1] = (std::uint64_t{ctr[3]} << 32) | ctr[2];
    buffered_ = 2;
  }

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Derive an independent stream index for a sub-purpose of one trial.
constexpr std::uint64_t substream(std::uint64_t trial, std::uint64_t purpose) {
  std::uint64_t z = trial + 0x9E3779B97F4A7C15ull * (purpose + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace rtlab
