#include "svsca/attack.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "support/oracles.hpp"
#include "svsca/rng.hpp"

using namespace svsca;
using namespace svsca::attack;

namespace {

snowv::KeyMaterial random_km(std::mt19937_64& gen) {
  snowv::KeyMaterial km;
  for (auto& b : km.key) b = static_cast<uint8_t>(gen());
  for (auto& b : km.iv) b = static_cast<uint8_t>(gen());
  return km;
}

}  // namespace

TEST_CASE("target spec validation") {
  TargetSpec ok;
  CHECK_NOTHROW(ok.validate());
  TargetSpec bad_word = ok;
  bad_word.word_index = 7;
  CHECK_THROWS_AS(bad_word.validate(), std::invalid_argument);
  bad_word.word_index = 16;
  CHECK_THROWS_AS(bad_word.validate(), std::invalid_argument);
  TargetSpec bad_bits = ok;
  bad_bits.bits = 3;
  CHECK_THROWS_AS(bad_bits.validate(), std::invalid_argument);
  CHECK(TargetSpec{Lfsr::B, 12, 4, true}.step() == 4);
  CHECK(TargetSpec{Lfsr::B, 12, 4, true}.name() == "B12.hi");
}

TEST_CASE("label derivation basics") {
  snowv::KeyMaterial zero;
  CHECK(derive_label(zero, TargetSpec{Lfsr::A, 8, 8, false}) == 0);

  snowv::KeyMaterial km;
  km.key[0] = 0x01;  // k0 = 0x0001 -> a[8] = 0x0001
  // Step-0 feedback word: mul_x_inv(0x0001, 0xcc87) = 0xcc87.
  CHECK(target_word(km, TargetSpec{Lfsr::A, 8, 8, false}) == 0xcc87);
  CHECK(derive_label(km, TargetSpec{Lfsr::A, 8, 1, false}) == 1);
  CHECK(derive_label(km, TargetSpec{Lfsr::A, 8, 8, false}) == 0x87);
  CHECK(derive_label(km, TargetSpec{Lfsr::A, 8, 8, true}) == 0xcc);
  CHECK(derive_label(km, TargetSpec{Lfsr::A, 8, 4, true}) == 0x0c);
}

TEST_CASE("labels match an independent transcription of the state machine") {
  std::mt19937_64 gen(2024);
  uint16_t inv_a = oracle::gf16_pow(2, 65534, 0x990f);
  uint16_t inv_b = oracle::gf16_pow(2, 65534, 0xc963);
  for (int trial = 0; trial < 1000; ++trial) {
    snowv::KeyMaterial km = random_km(gen);

    // Oracle route: independent load, literal recurrences, manual shift.
    oracle::SnowVRef ref;
    ref.load_only(km.key.data(), km.iv.data());
    uint16_t A[16], B[16];
    std::copy(ref.A, ref.A + 16, A);
    std::copy(ref.B, ref.B + 16, B);

    int step = trial % 8;
    uint16_t u = 0, v = 0;
    for (int s = 0; s <= step; ++s) {
      u = static_cast<uint16_t>(oracle::gf16_mul(A[0], 2, 0x990f) ^ A[1] ^
                                oracle::gf16_mul(A[8], inv_a, 0x990f) ^ B[0]);
      v = static_cast<uint16_t>(oracle::gf16_mul(B[0], 2, 0xc963) ^ B[3] ^
                                oracle::gf16_mul(B[8], inv_b, 0xc963) ^ A[0]);
      for (int j = 0; j < 15; ++j) {
        A[j] = A[j + 1];
        B[j] = B[j + 1];
      }
      A[15] = u;
      B[15] = v;
    }

    TargetSpec spec_a{Lfsr::A, 8 + step, 8, trial % 2 == 0};
    TargetSpec spec_b{Lfsr::B, 8 + step, 8, trial % 2 == 0};
    int expect_a = (spec_a.high_byte ? (u >> 8) : (u & 0xff));
    int expect_b = (spec_b.high_byte ? (v >> 8) : (v & 0xff));
    CHECK(derive_label(km, spec_a) == expect_a);
    CHECK(derive_label(km, spec_b) == expect_b);
  }
}

TEST_CASE("kvc finds the exact leak point on noiseless traces") {
  sim::LeakModel model = sim::LeakModel::hamming_weight_model();
  model.noise_sigma = 0;
  sim::CampaignSpec spec;
  spec.n = 64;
  spec.key_policy = sim::KeyPolicy::Fixed;
  spec.iv_policy = sim::IvPolicy::Random;
  spec.seed = 5;
  TraceSet ts = sim::simulate_campaign(spec, model);

  TargetSpec target{Lfsr::A, 8, 8, false};
  auto values = target_words(ts, target);
  auto sel = kvc_select(ts, values, 1);

  uint32_t u_off = 0;
  for (const auto& p : model.leak_points)
    if (p.intermediate == sim::Intermediate::U) u_off = p.offset;
  // Step 0 window starts right after the background.
  CHECK(sel.selected == std::vector<size_t>{model.background_len + u_off});
  CHECK(std::abs(sel.correlations[sel.selected[0]]) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("kvc on pure noise stays below the sampling bound") {
  TraceSet ts(40);
  CounterRng rng(9, RngPurpose::General, 3);
  const size_t n = 2000;
  Trace t;
  for (size_t i = 0; i < n; ++i) {
    t.samples.assign(40, 0.f);
    for (auto& s : t.samples) s = static_cast<float>(rng.next_gaussian());
    for (auto& b : t.key) b = static_cast<uint8_t>(rng.next_u32());
    for (auto& b : t.iv) b = static_cast<uint8_t>(rng.next_u32());
    ts.push_back(t);
  }
  auto values = target_words(ts, TargetSpec{Lfsr::A, 8, 8, false});
  auto sel = kvc_select(ts, values, 40);
  double max_abs = 0;
  for (double r : sel.correlations) max_abs = std::max(max_abs, std::abs(r));
  CHECK(max_abs < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("kvc rejects degenerate inputs and zeroes constant columns") {
  TraceSet ts(4);
  Trace t;
  CounterRng rng(4, RngPurpose::General, 8);
  for (int i = 0; i < 50; ++i) {
    t.samples = {static_cast<float>(i), 1.0f, static_cast<float>(i % 7), 2.0f};
    for (auto& b : t.key) b = static_cast<uint8_t>(rng.next_u32());
    t.iv[0] = static_cast<uint8_t>(i);
    ts.push_back(t);
  }
  auto values = target_words(ts, TargetSpec{Lfsr::A, 8, 8, false});
  auto sel = kvc_select(ts, values, 4);
  CHECK(sel.correlations[1] == 0.0);
  CHECK(sel.correlations[3] == 0.0);

  std::vector<uint16_t> constant(ts.size(), 42);
  CHECK_THROWS_WITH_AS(kvc_select(ts, constant, 2), doctest::Contains("degenerate"),
                       std::invalid_argument);
  TraceSet two(4);
  two.push_back(t);
  two.push_back(t);
  CHECK_THROWS_AS(kvc_select(two, {1, 2}, 1), std::invalid_argument);
}

TEST_CASE("noiseless weighted campaign: lda reaches full accuracy on one bit") {
  sim::LeakModel model = sim::LeakModel::weighted_model(0.0);
  sim::CampaignSpec cspec;
  cspec.n = 1500;
  cspec.key_policy = sim::KeyPolicy::Fixed;
  cspec.iv_policy = sim::IvPolicy::Random;
  std::mt19937_64 gen(77);
  cspec.base = random_km(gen);
  cspec.seed = 11;
  TraceSet ts = sim::simulate_campaign(cspec, model);
  auto parts = split(ts, SplitSpec{0.8, 0.0, 0.2, 3});

  TargetSpec target{Lfsr::A, 8, 1, false};
  PipelineConfig cfg;
  cfg.method = Method::Lda;
  cfg.kvc_top_k = 24;
  ProfilingResult res = run_profiling_attack(parts.train, parts.val, parts.test,
                                             target, cfg);
  CHECK(res.test_accuracy == 1.0);
  CHECK(res.train_accuracy == 1.0);
}

TEST_CASE("fits are functions of the training split only") {
  sim::LeakModel model = sim::LeakModel::weighted_model(1.0);
  sim::CampaignSpec cspec;
  cspec.n = 600;
  cspec.key_policy = sim::KeyPolicy::Fixed;
  cspec.iv_policy = sim::IvPolicy::Random;
  std::mt19937_64 gen(78);
  cspec.base = random_km(gen);
  cspec.seed = 12;
  TraceSet ts = sim::simulate_campaign(cspec, model);
  auto parts = split(ts, SplitSpec{0.6, 0.2, 0.2, 4});

  TargetSpec target{Lfsr::A, 8, 2, false};
  PipelineConfig cfg;
  cfg.method = Method::Lda;
  cfg.kvc_top_k = 16;
  cfg.use_pca = true;

  ProfilingResult full = run_profiling_attack(parts.train, parts.val, parts.test,
                                              target, cfg);
  // Deleting the test split (and the val split) changes nothing fitted.
  TraceSet empty(ts.samples_per_trace());
  ProfilingResult refit = run_profiling_attack(parts.train, empty, empty, target,
                                               cfg);
  CHECK(full.classifier.window.selected == refit.classifier.window.selected);
  CHECK(full.classifier.pca->components == refit.classifier.pca->components);
  CHECK(full.classifier.lda->weights == refit.classifier.lda->weights);
  CHECK(std::isnan(refit.test_accuracy));
}

TEST_CASE("majority vote probability") {
  CHECK(majority_vote_prob(1.0, 7) == 1.0);
  CHECK(majority_vote_prob(0.0, 7) == 0.0);
  for (int n : {1, 3, 9, 101})
    CHECK(majority_vote_prob(0.5, n) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(majority_vote_prob(0.8, 1) == doctest::Approx(0.8).epsilon(1e-12));

  // Against the direct enumeration oracle.
  for (double p : {0.55, 0.6, 0.79, 0.9, 0.97, 0.9999}) {
    for (int n : {1, 3, 9, 21, 51, 101}) {
      double expect = static_cast<double>(oracle::binomial_majority(p, n));
      CHECK(majority_vote_prob(p, n) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  // The recorded value for p = 0.79, n = 9 (does not clear 0.9999).
  double v = majority_vote_prob(0.79, 9);
  CHECK(v == doctest::Approx(0.9759720405652108).epsilon(1e-12));
  CHECK(v < 0.9999);

  CHECK_THROWS_AS(majority_vote_prob(0.7, 4), std::invalid_argument);
  CHECK_THROWS_AS(majority_vote_prob(1.2, 3), std::invalid_argument);
}

TEST_CASE("vote probability is monotone in p and in n") {
  for (int n : {3, 11, 41}) {
    double prev = 0;
    for (double p = 0.05; p < 1.0; p += 0.05) {
      double cur = majority_vote_prob(p, n);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }
  for (double p : {0.55, 0.7, 0.9}) {
    double prev = 0;
    for (int n = 1; n <= 151; n += 2) {
      double cur = majority_vote_prob(p, n);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("minimum traces to disclosure") {
  CHECK(mtd(1.0) == 1);
  CHECK(mtd(0.9999999) == 1);
  // Smallest odd n with the enumerated tail >= 0.9999.
  for (double p : {0.79, 0.9, 0.975}) {
    int n = mtd(p);
    CHECK(static_cast<double>(oracle::binomial_majority(p, n)) >= 0.9999);
    if (n > 1)
      CHECK(static_cast<double>(oracle::binomial_majority(p, n - 2)) < 0.9999);
  }
  CHECK_THROWS_AS(mtd(0.5), std::invalid_argument);
  CHECK_THROWS_AS(mtd(0.42), std::invalid_argument);

  MtdCurve curve = mtd_curve(0.79);
  CHECK(curve.mtd == mtd(0.79));
  CHECK(curve.n.size() == static_cast<size_t>(curve.mtd / 2 + 1));
  CHECK(curve.probability.back() >= 0.9999);
}

TEST_CASE("solve_word inverts both recurrences") {
  CHECK(solve_word_a(0, 0, 0, 0) == 0);
  CHECK(solve_word_a(0xcc87, 0, 0, 0) == 0x0001);
  CHECK(solve_word_b(0xe4b1, 0, 0, 0) == 0x0001);

  // Exhaustive round trip with fixed knowns.
  std::mt19937_64 gen(91);
  uint16_t a0 = static_cast<uint16_t>(gen());
  uint16_t a1 = static_cast<uint16_t>(gen());
  uint16_t b0 = static_cast<uint16_t>(gen());
  uint16_t b3 = static_cast<uint16_t>(gen());
  for (uint32_t w = 0; w < 65536; ++w) {
    uint16_t target = static_cast<uint16_t>(w);
    uint16_t u = static_cast<uint16_t>(
        snowv::mul_x(a0, snowv::GfConstants::alpha) ^ a1 ^
        snowv::mul_x_inv(target, snowv::GfConstants::alpha_inv) ^ b0);
    CHECK(solve_word_a(u, a0, a1, b0) == target);
    uint16_t v = static_cast<uint16_t>(
        snowv::mul_x(b0, snowv::GfConstants::beta) ^ b3 ^
        snowv::mul_x_inv(target, snowv::GfConstants::beta_inv) ^ a0);
    CHECK(solve_word_b(v, b0, b3, a0) == target);
  }
}

TEST_CASE("oracle predictor recovers the exact key") {
  sim::LeakModel model = sim::LeakModel::weighted_model(2.0);
  std::mt19937_64 gen(404);
  OraclePredictor oracle_bank;
  for (int trial = 0; trial < 25; ++trial) {
    sim::CampaignSpec cspec;
    cspec.n = 5;
    cspec.key_policy = sim::KeyPolicy::Fixed;
    cspec.iv_policy = sim::IvPolicy::Fixed;
    cspec.base = random_km(gen);
    cspec.seed = 1000 + trial;
    TraceSet attack_set = sim::simulate_campaign(cspec, model);
    AttackResult res = recover_full_key(oracle_bank, attack_set);
    CHECK(res.success);
    CHECK(res.key == cspec.base.key);
    CHECK(res.traces_used == 5);
  }
}

TEST_CASE("recover_full_key validates its inputs") {
  sim::LeakModel model = sim::LeakModel::hamming_weight_model();
  std::mt19937_64 gen(17);
  sim::CampaignSpec cspec;
  cspec.n = 4;
  cspec.key_policy = sim::KeyPolicy::Fixed;
  cspec.iv_policy = sim::IvPolicy::Random;  // differing IVs: invalid
  cspec.base = random_km(gen);
  TraceSet bad = sim::simulate_campaign(cspec, model);
  OraclePredictor p;
  CHECK_THROWS_WITH_AS(recover_full_key(p, bad), doctest::Contains("IV"),
                       std::invalid_argument);

  TraceSet empty(model.trace_len());
  CHECK_THROWS_AS(recover_full_key(p, empty), std::invalid_argument);
}

TEST_CASE("even trace counts drop one trace before voting") {
  sim::LeakModel model = sim::LeakModel::weighted_model(1.0);
  std::mt19937_64 gen(18);
  sim::CampaignSpec cspec;
  cspec.n = 6;
  cspec.key_policy = sim::KeyPolicy::Fixed;
  cspec.iv_policy = sim::IvPolicy::Fixed;
  cspec.base = random_km(gen);
  TraceSet ts = sim::simulate_campaign(cspec, model);
  OraclePredictor p;
  AttackResult res = recover_full_key(p, ts);
  CHECK(res.traces_used == 5);
  CHECK(res.success);
}

TEST_CASE("keystream verification distinguishes right and wrong keys") {
  sim::LeakModel model = sim::LeakModel::weighted_model(0.5);
  std::mt19937_64 gen(19);
  sim::CampaignSpec cspec;
  cspec.n = 3;
  cspec.key_policy = sim::KeyPolicy::Fixed;
  cspec.iv_policy = sim::IvPolicy::Fixed;
  cspec.base = random_km(gen);
  TraceSet ts = sim::simulate_campaign(cspec, model);

  snowv::CipherState st = snowv::init(cspec.base);
  std::vector<uint8_t> stream = snowv::keystream_bytes(st, 2);

  RecoveryOptions opts;
  opts.known_keystream = stream;
  OraclePredictor p;
  AttackResult good = recover_full_key(p, ts, opts);
  CHECK(good.success);
  CHECK(good.keystream_mismatch_positions.empty());

  // Corrupt the expected stream: verification must fail and report where.
  opts.known_keystream[3] ^= 0x40;
  AttackResult bad = recover_full_key(p, ts, opts);
  CHECK_FALSE(bad.success);
  CHECK(bad.keystream_mismatch_positions == std::vector<size_t>{3});
}
