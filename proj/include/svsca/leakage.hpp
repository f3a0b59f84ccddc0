#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "svsca/snowv.hpp"
#include "svsca/trace_set.hpp"

namespace svsca::sim {

inline int hamming_weight(uint16_t v) { return std::popcount(v); }

// The six values computed by one LFSR step, in leak order.
enum class Intermediate : uint8_t {
  U = 0,
  V = 1,
  MulXA = 2,     // mul_x(a[0], alpha)
  MulXInvA = 3,  // mul_x_inv(a[8], alpha^-1)
  MulXB = 4,     // mul_x(b[0], beta)
  MulXInvB = 5,  // mul_x_inv(b[8], beta^-1)
};
constexpr int kNumIntermediates = 6;

// Which part of the 16-bit value a sample exposes. Byte-level points
// mirror a device moving halfwords through an 8-bit-visible datapath.
enum class WordPart : uint8_t { Word = 0, LowByte = 1, HighByte = 2 };

struct LeakPoint {
  uint32_t offset;                  // sample index within the step window
  Intermediate intermediate;        // which value leaks there
  WordPart part = WordPart::Word;   // which bits of it
};

// Where and how the device leaks. The default model is plain Hamming
// weight: sample = scale * HW(value) + N(0, sigma^2) at each leak point,
// noise only elsewhere.
//
// The weighted profile adds effects seen on real hardware that make
// byte-level classification learnable at all: byte-granular leak points,
// per-bit weights (bus lines load differently) and cross-byte bit
// interactions (value-dependent switching), the patterns drawn once per
// device from pattern_seed. A sample at a leak point is
//   scale * [ sum_j w_j bit_j(part) + q * sum_j beta_j bit_j bit_{j+8} ]
// with w_j = 1 + bit_weight_spread * eta_j. Spread 0 and interaction 0
// reduce exactly to Hamming weight of the part.
struct LeakModel {
  double scale = 1.0;
  double noise_sigma = 1.0;
  uint32_t samples_per_step = 32;
  uint32_t background_len = 64;
  std::vector<LeakPoint> leak_points;

  double bit_weight_spread = 0.0;
  double interaction_strength = 0.0;
  uint64_t pattern_seed = 0x5ca1ab1e;

  uint32_t trace_len() const { return background_len + 8 * samples_per_step; }

  // Throws std::invalid_argument on duplicate/out-of-range offsets or a
  // negative noise sigma.
  void validate() const;

  // One leak point per intermediate per step, plain Hamming weight.
  static LeakModel hamming_weight_model();

  // The profile used by the attack studies: repeated leak points per
  // intermediate with per-bit weights and bit interactions.
  static LeakModel weighted_model(double noise_sigma = 1.0);
};

enum class KeyPolicy { Fixed, Fresh };
enum class IvPolicy { Fixed, Random, FixedVsRandom };

struct CampaignSpec {
  uint64_t n = 0;
  KeyPolicy key_policy = KeyPolicy::Fixed;
  IvPolicy iv_policy = IvPolicy::Random;
  snowv::KeyMaterial base;  // key/iv used by the Fixed policies
  uint64_t seed = 0;
  unsigned jobs = 1;
};

// The per-step intermediates of the first eight updates on the
// key-loaded state; exposed for label derivation and tests.
struct StepLeaks {
  std::array<uint16_t, kNumIntermediates> value;
};
std::array<StepLeaks, 8> step_intermediates(const snowv::KeyMaterial& km);

// Device response to one value at one leak point (no noise): the
// weighted bit sum described above, scale excluded.
double leak_response(const LeakModel& model, size_t point_index, uint16_t value);

// Simulate one trace. Deterministic in (model, km, seed, trace_index):
// sample values never depend on how many traces surround this one.
Trace simulate_trace(const snowv::KeyMaterial& km, const LeakModel& model,
                     uint64_t seed, uint64_t trace_index, bool fixed_flag = false);

// Simulate a campaign; parallel over traces when spec.jobs > 1 with
// output bit-identical to the serial path.
TraceSet simulate_campaign(const CampaignSpec& spec, const LeakModel& model);

}  // namespace svsca::sim
