#pragma once

#include <cstdint>

namespace shark {

/// PCG32 generator (O'Neill's pcg32_random_r). Chosen over std::mt19937
/// because its 16-byte state serializes trivially into checkpoints and the
/// float conversions below are identical on every platform.
class Pcg32 {
 public:
  Pcg32() : Pcg32(0x853c49e6748fea9bULL) {}

  explicit Pcg32(uint64_t seed, uint64_t stream = 0) { reseed(seed, stream); }

  void reseed(uint64_t seed, uint64_t stream = 0) {
    state_ = 0u;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  uint32_t next_u32() {
    uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
    uint32_t rot = static_cast<uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  /// Uniform in [0, 1) with 24 bits of mantissa.
  float next_float() {
    return static_cast<float>(next_u32() >> 8) * (1.0f / 16777216.0f);
  }

  float uniform(float lo, float hi) { return lo + (hi - lo) * next_float(); }

  /// Uniform integer in [0, n). Debiased by rejection.
  uint64_t next_below(uint64_t n) {
    if (n <= 1) return 0;
    uint64_t threshold = (0u - n) % n;
    for (;;) {
      uint64_t r = (static_cast<uint64_t>(next_u32()) << 32) | next_u32();
      if (r >= threshold) return r % n;
    }
  }

  uint64_t state() const { return state_; }
  uint64_t stream() const { return inc_; }

  void restore(uint64_t state, uint64_t inc) {
    state_ = state;
    inc_ = inc;
  }

 private:
  uint64_t state_ = 0;
  uint64_t inc_ = 1;
};

}  // namespace shark
