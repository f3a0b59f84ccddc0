#include "svsca/leakage.hpp"

#include <atomic>
#include <set>
#include <stdexcept>
#include <thread>

#include "svsca/rng.hpp"

namespace svsca::sim {

namespace {

// Random access into a per-trace noise stream: one gaussian per counter
// slot, so a leak point's noise follows the point rather than the sample
// index it happens to land on.
double gaussian_at(uint64_t seed, uint64_t trace_index, uint64_t slot) {
  std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                 static_cast<uint32_t>(seed >> 32)};
  uint64_t stream = rng_stream(RngPurpose::TraceNoise, trace_index);
  std::array<uint32_t, 4> ctr = {
      static_cast<uint32_t>(slot), static_cast<uint32_t>(slot >> 32),
      static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
  auto out = philox4x32(ctr, key);
  uint64_t bits = (static_cast<uint64_t>(out[1]) << 32) | out[0];
  double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  return inverse_normal_cdf(u);
}

constexpr uint64_t kBackgroundSlotBase = 0;
constexpr uint64_t kLeakSlotBase = 1ull << 32;

// Unit-variance-ish bounded weight perturbation in [-1, 1].
double pattern_eta(uint64_t pattern_seed, uint64_t id) {
  CounterRng rng(pattern_seed, RngPurpose::LeakPattern, id);
  return 2.0 * rng.next_unit() - 1.0;
}

// Stable identity of a leak point: (intermediate, occurrence ordinal).
// Noise and weight patterns are keyed by this, not by list position or
// offset, so reassigning offsets moves a leak's samples wholesale.
uint64_t point_identity(const LeakModel& model, size_t point_index) {
  Intermediate k = model.leak_points[point_index].intermediate;
  uint64_t ordinal = 0;
  for (size_t i = 0; i < point_index; ++i)
    if (model.leak_points[i].intermediate == k) ++ordinal;
  return static_cast<uint64_t>(k) * 16 + ordinal;
}

}  // namespace

void LeakModel::validate() const {
  if (noise_sigma < 0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (samples_per_step == 0)
    throw std::invalid_argument("samples_per_step must be positive");
  std::set<uint32_t> seen;
  for (const auto& p : leak_points) {
    if (p.offset >= samples_per_step)
      throw std::invalid_argument("leak offset " + std::to_string(p.offset) +
                                  " outside step of " +
                                  std::to_string(samples_per_step) + " samples");
    if (!seen.insert(p.offset).second)
      throw std::invalid_argument("duplicate leak offset " +
                                  std::to_string(p.offset));
  }
}

LeakModel LeakModel::hamming_weight_model() {
  LeakModel m;
  for (int k = 0; k < kNumIntermediates; ++k)
    m.leak_points.push_back(
        {static_cast<uint32_t>(2 + 4 * k), static_cast<Intermediate>(k)});
  return m;
}

LeakModel LeakModel::weighted_model(double noise_sigma) {
  LeakModel m;
  m.noise_sigma = noise_sigma;
  m.samples_per_step = 48;
  m.bit_weight_spread = 0.35;
  m.interaction_strength = 0.5;
  // The attacked feedback words leak byte-wise over several cycles;
  // the four multiplier outputs leak as whole-word Hamming weight.
  uint32_t off = 2;
  for (Intermediate k : {Intermediate::U, Intermediate::V}) {
    for (int rep = 0; rep < 8; ++rep)
      m.leak_points.push_back({off++, k, WordPart::LowByte});
    for (int rep = 0; rep < 8; ++rep)
      m.leak_points.push_back({off++, k, WordPart::HighByte});
  }
  for (Intermediate k : {Intermediate::MulXA, Intermediate::MulXInvA,
                         Intermediate::MulXB, Intermediate::MulXInvB}) {
    m.leak_points.push_back({off++, k, WordPart::Word});
    m.leak_points.push_back({off++, k, WordPart::Word});
  }
  return m;
}

std::array<StepLeaks, 8> step_intermediates(const snowv::KeyMaterial& km) {
  using namespace snowv;
  CipherState st = init(km, /*stop_after_load=*/true);
  std::array<StepLeaks, 8> out;
  for (int s = 0; s < 8; ++s) {
    auto& leak = out[s].value;
    leak[static_cast<int>(Intermediate::MulXA)] = mul_x(st.a[0], GfConstants::alpha);
    leak[static_cast<int>(Intermediate::MulXInvA)] =
        mul_x_inv(st.a[8], GfConstants::alpha_inv);
    leak[static_cast<int>(Intermediate::MulXB)] = mul_x(st.b[0], GfConstants::beta);
    leak[static_cast<int>(Intermediate::MulXInvB)] =
        mul_x_inv(st.b[8], GfConstants::beta_inv);
    StepWords w = lfsr_step(st);
    leak[static_cast<int>(Intermediate::U)] = w.u;
    leak[static_cast<int>(Intermediate::V)] = w.v;
  }
  return out;
}

double leak_response(const LeakModel& model, size_t point_index, uint16_t value) {
  const WordPart part = model.leak_points[point_index].part;
  int bit_lo = part == WordPart::HighByte ? 8 : 0;
  int bit_hi = part == WordPart::LowByte ? 8 : 16;
  if (model.bit_weight_spread == 0.0 && model.interaction_strength == 0.0) {
    uint16_t mask = part == WordPart::Word
                        ? 0xffff
                        : (part == WordPart::LowByte ? 0x00ff : 0xff00);
    return static_cast<double>(hamming_weight(value & mask));
  }
  double acc = 0.0;
  uint64_t base = point_identity(model, point_index) * 64;
  for (int j = bit_lo; j < bit_hi; ++j) {
    if (value & (1u << j))
      acc += 1.0 + model.bit_weight_spread * pattern_eta(model.pattern_seed, base + j);
  }
  if (model.interaction_strength != 0.0) {
    // Cross-byte switching terms; present for every part.
    for (int j = 0; j < 8; ++j) {
      bool lo = value & (1u << j);
      bool hi = value & (1u << (j + 8));
      if (lo && hi)
        acc += model.interaction_strength *
               pattern_eta(model.pattern_seed, base + 32 + j);
    }
  }
  return acc;
}

Trace simulate_trace(const snowv::KeyMaterial& km, const LeakModel& model,
                     uint64_t seed, uint64_t trace_index, bool fixed_flag) {
  Trace t;
  t.key = km.key;
  t.iv = km.iv;
  t.fixed_flag = fixed_flag;
  const uint32_t len = model.trace_len();
  t.samples.resize(len);

  const bool noisy = model.noise_sigma > 0.0;
  for (uint32_t i = 0; i < len; ++i)
    t.samples[i] = noisy
                       ? static_cast<float>(model.noise_sigma *
                                            gaussian_at(seed, trace_index,
                                                        kBackgroundSlotBase + i))
                       : 0.0f;

  auto leaks = step_intermediates(km);
  for (int s = 0; s < 8; ++s) {
    uint32_t step_base = model.background_len + s * model.samples_per_step;
    for (size_t p = 0; p < model.leak_points.size(); ++p) {
      const auto& point = model.leak_points[p];
      uint16_t value = leaks[s].value[static_cast<int>(point.intermediate)];
      double signal = model.scale * leak_response(model, p, value);
      double noise = noisy ? model.noise_sigma *
                                 gaussian_at(seed, trace_index,
                                             kLeakSlotBase +
                                                 8 * point_identity(model, p) + s)
                           : 0.0;
      t.samples[step_base + point.offset] = static_cast<float>(signal + noise);
    }
  }
  return t;
}

TraceSet simulate_campaign(const CampaignSpec& spec, const LeakModel& model) {
  model.validate();
  TraceSet ts(model.trace_len(), /*with_keys=*/true);

  auto make_km = [&](uint64_t i, bool& fixed_flag) {
    snowv::KeyMaterial km = spec.base;
    if (spec.key_policy == KeyPolicy::Fresh) {
      CounterRng rng(spec.seed, RngPurpose::TraceKey, i);
      for (auto& b : km.key) b = static_cast<uint8_t>(rng.next_u32());
    }
    bool random_iv = spec.iv_policy == IvPolicy::Random;
    if (spec.iv_policy == IvPolicy::FixedVsRandom) {
      CounterRng flag(spec.seed, RngPurpose::GroupFlag, i);
      random_iv = !flag.next_bool();
    }
    if (random_iv) {
      CounterRng rng(spec.seed, RngPurpose::TraceIv, i);
      for (auto& b : km.iv) b = static_cast<uint8_t>(rng.next_u32());
    }
    fixed_flag = !random_iv;
    return km;
  };

  unsigned jobs = spec.jobs == 0 ? 1 : spec.jobs;
  if (jobs <= 1 || spec.n < 2 * jobs) {
    for (uint64_t i = 0; i < spec.n; ++i) {
      bool fixed_flag = false;
      auto km = make_km(i, fixed_flag);
      ts.push_back(simulate_trace(km, model, spec.seed, i, fixed_flag));
    }
    return ts;
  }

  std::vector<Trace> traces(spec.n);
  std::vector<std::thread> workers;
  std::atomic<uint64_t> next{0};
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        uint64_t i = next.fetch_add(64);
        if (i >= spec.n) return;
        uint64_t end = std::min<uint64_t>(i + 64, spec.n);
        for (; i < end; ++i) {
          bool fixed_flag = false;
          auto km = make_km(i, fixed_flag);
          traces[i] = simulate_trace(km, model, spec.seed, i, fixed_flag);
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& t : traces) ts.push_back(t);
  return ts;
}

}  // namespace svsca::sim
