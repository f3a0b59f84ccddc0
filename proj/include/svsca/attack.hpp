#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "svsca/fcn.hpp"
#include "svsca/lda.hpp"
#include "svsca/leakage.hpp"
#include "svsca/pca.hpp"
#include "svsca/trace_set.hpp"

namespace svsca::attack {

enum class Lfsr : uint8_t { A = 0, B = 1 };

// Which state word is attacked and how it is labeled. Word index w of
// LFSR A or B is the key word exposed by update step w - 8 on the
// loaded state; the classifier works on the step's feedback word (the
// value entering a[15]/b[15]), whose byte bits form the class label.
struct TargetSpec {
  Lfsr lfsr = Lfsr::A;
  int word_index = 8;  // 8..15
  int bits = 8;        // classes = 2^bits, bits in {1,2,4,8}
  bool high_byte = false;

  int step() const { return word_index - 8; }
  int num_classes() const { return 1 << bits; }
  void validate() const;
  std::string name() const;  // e.g. "A8.lo"
};

// The feedback word (u for LFSR A, v for LFSR B) of the target's step,
// computed from known key material.
uint16_t target_word(const snowv::KeyMaterial& km, const TargetSpec& spec);
std::vector<uint16_t> target_words(const TraceSet& ts, const TargetSpec& spec);

// Low `bits` bits of the chosen byte of the target word.
int derive_label(const snowv::KeyMaterial& km, const TargetSpec& spec);
std::vector<int> derive_labels(const TraceSet& ts, const TargetSpec& spec);

// ---- point selection ----------------------------------------------------

struct KvcSelection {
  std::vector<double> correlations;  // Pearson r per sample index
  std::vector<size_t> selected;      // sorted; the top_k by |r|
  int top_k = 0;
};

// Correlates every sample column with HW(value). Constant columns get
// r = 0; identical values across traces are a degenerate input.
KvcSelection kvc_select(const TraceSet& ts, const std::vector<uint16_t>& values,
                        int top_k);

// ---- profiling pipeline ---------------------------------------------------

enum class Method : uint8_t { Lda = 0, Fcn = 1 };

struct PipelineConfig {
  Method method = Method::Lda;
  bool use_pca = false;
  int kvc_top_k = 64;
  double pca_target_variance = 0.99;
  int pca_max_components = 2000;
  double lda_shrinkage = 1e-3;
  std::vector<int> fcn_hidden = {512, 256, 128};
  ml::Activation activation = ml::Activation::ReLU;
  ml::TrainConfig train;
};

// A fitted per-target classifier together with the transforms that were
// fit on the training split; applying it to new traces replays KVC
// windowing and PCA exactly as fitted.
struct TrainedClassifier {
  TargetSpec spec;
  PipelineConfig config;
  KvcSelection window;
  std::optional<ml::PcaModel> pca;
  std::optional<ml::LdaModel> lda;
  std::optional<ml::FcnModel> fcn;

  std::vector<int> predict(const TraceSet& ts) const;
};

struct ProfilingResult {
  TrainedClassifier classifier;
  double train_accuracy = 0;
  double val_accuracy = 0;  // NaN when the validation split is empty
  double test_accuracy = 0;
};

// KVC window -> optional PCA -> classifier, every transform fit on the
// training split only and replayed on val/test.
ProfilingResult run_profiling_attack(const TraceSet& train, const TraceSet& val,
                                     const TraceSet& test, const TargetSpec& spec,
                                     const PipelineConfig& cfg);

// ---- voting and traces-to-disclosure --------------------------------------

// P(majority of n independent per-trace decisions is correct), per-trace
// accuracy p, odd n. Evaluated in log space.
double majority_vote_prob(double p, int n);

struct MtdCurve {
  std::vector<int> n;
  std::vector<double> probability;
  int mtd = 0;
};

// Smallest odd n with majority_vote_prob(p, n) >= target. Throws
// std::invalid_argument for p <= 0.5 (the vote never converges).
int mtd(double p, double target = 0.9999);
MtdCurve mtd_curve(double p, double target = 0.9999, int max_n = 100001);

// ---- recurrence inversion --------------------------------------------------

// Unique a[8] with u = mul_x(a0) ^ a1 ^ mul_x_inv(a[8]) ^ b0, via a
// precomputed inverse table of mul_x_inv (a bijection on 16-bit words).
uint16_t solve_word_a(uint16_t u, uint16_t a0, uint16_t a1, uint16_t b0);
// Unique b[8] with v = mul_x(b0) ^ b3 ^ mul_x_inv(b[8]) ^ a0.
uint16_t solve_word_b(uint16_t v, uint16_t b0, uint16_t b3, uint16_t a0);

// ---- full key recovery ------------------------------------------------------

// Byte predictions for the feedback word of (lfsr, step), one entry per
// attack trace. Implemented by trained classifier banks and by the
// ground-truth oracle used in tests.
class WordPredictor {
 public:
  virtual ~WordPredictor() = default;
  struct BytePredictions {
    std::vector<int> low;
    std::vector<int> high;
  };
  virtual BytePredictions predict(const TraceSet& ts, Lfsr lfsr, int step) const = 0;
};

// 32 trained classifiers: 2 LFSRs x 8 steps x {low, high} byte.
class TrainedBank : public WordPredictor {
 public:
  void put(TrainedClassifier clf);
  const TrainedClassifier& at(Lfsr lfsr, int step, bool high_byte) const;
  BytePredictions predict(const TraceSet& ts, Lfsr lfsr, int step) const override;
  bool complete() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [key, clf] : classifiers_) fn(clf);
  }

 private:
  std::map<std::tuple<int, int, int>, TrainedClassifier> classifiers_;
};

// Reads the true feedback words from the traces' stored key material.
class OraclePredictor : public WordPredictor {
 public:
  BytePredictions predict(const TraceSet& ts, Lfsr lfsr, int step) const override;
};

struct WordRecovery {
  Lfsr lfsr = Lfsr::A;
  int step = 0;
  uint16_t feedback_word = 0;  // voted u/v
  uint16_t solved_word = 0;    // recovered key word
  double low_margin = 0;       // vote share lead of the winning byte
  double high_margin = 0;
  bool low_confidence = false;
};

struct AttackResult {
  std::array<uint16_t, 16> key_words{};  // k0..k15
  std::array<uint8_t, 32> key{};
  std::vector<WordRecovery> words;       // 16 entries, A steps then B steps
  size_t traces_used = 0;
  bool ground_truth_available = false;
  bool success = false;
  std::vector<size_t> keystream_mismatch_positions;
};

struct RecoveryOptions {
  double confidence_threshold = 0.0;  // vote-margin floor for flagging
  // Optional known keystream prefix to verify the recovered key against.
  std::vector<uint8_t> known_keystream;
};

// Walks steps 0..7, votes the predicted u/v bytes across the attack
// traces, solves each recurrence with the IV and previously recovered
// words, and assembles the 256-bit key. All attack traces must share
// one IV (and one key when ground truth is present).
AttackResult recover_full_key(const WordPredictor& predictor,
                              const TraceSet& attack_traces,
                              const RecoveryOptions& opts = {});

std::string to_string(Method m);
Method method_from_string(const std::string& name);

}  // namespace svsca::attack
