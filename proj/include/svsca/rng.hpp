#pragma once

#include <array>
#include <cstdint>

namespace svsca {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A block cipher on the counter: no state to carry around, any block of
// the sequence can be computed directly, and disjoint (key, stream)
// pairs give independent streams. This is what makes trace generation
// splittable per trace while staying bit-identical to the serial path.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key);

// Inverse of the standard normal CDF. Acklam's rational approximation
// refined with one Halley step on erfc; |error| < 1e-13 over (0,1).
double inverse_normal_cdf(double p);

// Stream identifiers partition the counter space. Every consumer of
// randomness owns a (purpose, id) pair so that adding draws in one
// place never shifts the values drawn somewhere else.
enum class RngPurpose : uint8_t {
  TraceNoise = 1,
  TraceIv = 2,
  TraceKey = 3,
  GroupFlag = 4,
  Shuffle = 5,
  WeightInit = 6,
  LeakPattern = 7,
  General = 8,
};

constexpr uint64_t rng_stream(RngPurpose purpose, uint64_t id) {
  return (static_cast<uint64_t>(purpose) << 56) | (id & 0x00ff'ffff'ffff'ffffULL);
}

// Sequential view over one Philox stream.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream);
  CounterRng(uint64_t seed, RngPurpose purpose, uint64_t id)
      : CounterRng(seed, rng_stream(purpose, id)) {}

  uint32_t next_u32();
  uint64_t next_u64();

  // Uniform on the open interval (0,1) with 53 random bits.
  double next_unit();

  // Standard normal deviate, one uniform per draw.
  double next_gaussian() { return inverse_normal_cdf(next_unit()); }

  // Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
  uint64_t next_below(uint64_t bound);

  bool next_bool() { return (next_u32() & 1u) != 0; }

 private:
  void refill();

  std::array<uint32_t, 2> key_;
  uint64_t stream_;
  uint64_t block_ = 0;
  std::array<uint32_t, 4> buf_{};
  unsigned pos_ = 4;
};

}  // namespace svsca
