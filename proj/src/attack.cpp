#include "svsca/attack.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace svsca::attack {

using snowv::KeyMaterial;

void TargetSpec::validate() const {
  if (word_index < 8 || word_index > 15)
    throw std::invalid_argument("word index must be in [8,15], got " +
                                std::to_string(word_index));
  if (bits != 1 && bits != 2 && bits != 4 && bits != 8)
    throw std::invalid_argument("bits must be one of 1,2,4,8");
}

std::string TargetSpec::name() const {
  return std::string(lfsr == Lfsr::A ? "A" : "B") + std::to_string(word_index) +
         (high_byte ? ".hi" : ".lo");
}

uint16_t target_word(const KeyMaterial& km, const TargetSpec& spec) {
  spec.validate();
  auto leaks = sim::step_intermediates(km);
  auto kind = spec.lfsr == Lfsr::A ? sim::Intermediate::U : sim::Intermediate::V;
  return leaks[spec.step()].value[static_cast<int>(kind)];
}

std::vector<uint16_t> target_words(const TraceSet& ts, const TargetSpec& spec) {
  spec.validate();
  if (!ts.has_keys())
    throw std::invalid_argument("trace set has no key material for labeling");
  std::vector<uint16_t> out(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    KeyMaterial km;
    km.key = ts.key(i);
    km.iv = ts.iv(i);
    out[i] = target_word(km, spec);
  }
  return out;
}

namespace {

int word_to_label(uint16_t word, const TargetSpec& spec) {
  int byte = spec.high_byte ? (word >> 8) : (word & 0xff);
  return byte & ((1 << spec.bits) - 1);
}

}  // namespace

int derive_label(const KeyMaterial& km, const TargetSpec& spec) {
  return word_to_label(target_word(km, spec), spec);
}

std::vector<int> derive_labels(const TraceSet& ts, const TargetSpec& spec) {
  auto words = target_words(ts, spec);
  std::vector<int> labels(words.size());
  for (size_t i = 0; i < words.size(); ++i)
    labels[i] = word_to_label(words[i], spec);
  return labels;
}

KvcSelection kvc_select(const TraceSet& ts, const std::vector<uint16_t>& values,
                        int top_k) {
  if (ts.size() < 3)
    throw std::invalid_argument("kvc_select needs at least 3 traces");
  if (values.size() != ts.size())
    throw std::invalid_argument("one known value per trace required");
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  bool all_equal =
      std::all_of(values.begin(), values.end(),
                  [&](uint16_t v) { return v == values.front(); });
  if (all_equal)
    throw std::invalid_argument("degenerate input: all known values are equal");

  const size_t n = ts.size();
  const size_t d = ts.samples_per_trace();

  std::vector<double> hw(n);
  double hw_mean = 0;
  for (size_t i = 0; i < n; ++i) {
    hw[i] = sim::hamming_weight(values[i]);
    hw_mean += hw[i];
  }
  hw_mean /= static_cast<double>(n);
  double hw_ss = 0;
  for (size_t i = 0; i < n; ++i) hw_ss += (hw[i] - hw_mean) * (hw[i] - hw_mean);

  KvcSelection sel;
  sel.top_k = std::min<int>(top_k, static_cast<int>(d));
  sel.correlations.assign(d, 0.0);

  std::vector<double> col_mean(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    auto row = ts.trace(i);
    for (size_t j = 0; j < d; ++j) col_mean[j] += row[j];
  }
  for (auto& m : col_mean) m /= static_cast<double>(n);

  std::vector<double> cross(d, 0.0), col_ss(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    auto row = ts.trace(i);
    double dh = hw[i] - hw_mean;
    for (size_t j = 0; j < d; ++j) {
      double dx = row[j] - col_mean[j];
      cross[j] += dx * dh;
      col_ss[j] += dx * dx;
    }
  }
  for (size_t j = 0; j < d; ++j) {
    double denom = std::sqrt(col_ss[j] * hw_ss);
    sel.correlations[j] = denom > 0 ? cross[j] / denom : 0.0;
  }

  // Top-k by |r|, ties toward the lower index, reported sorted.
  std::vector<size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(sel.correlations[a]) > std::abs(sel.correlations[b]);
  });
  sel.selected.assign(order.begin(), order.begin() + sel.top_k);
  std::sort(sel.selected.begin(), sel.selected.end());
  return sel;
}

namespace {

Eigen::MatrixXd gather_columns(const TraceSet& ts, const std::vector<size_t>& cols) {
  Eigen::MatrixXd X(ts.size(), cols.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    auto row = ts.trace(i);
    for (size_t j = 0; j < cols.size(); ++j) X(i, j) = row[cols[j]];
  }
  return X;
}

double label_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.empty()) return std::nan("");
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace

std::vector<int> TrainedClassifier::predict(const TraceSet& ts) const {
  Eigen::MatrixXd X = gather_columns(ts, window.selected);
  if (pca) X = ml::pca_transform(*pca, X);
  if (lda) return ml::lda_predict(*lda, X).labels;
  if (!fcn) throw std::logic_error("classifier has no fitted model");
  return fcn->predict(X.cast<float>());
}

ProfilingResult run_profiling_attack(const TraceSet& train, const TraceSet& val,
                                     const TraceSet& test, const TargetSpec& spec,
                                     const PipelineConfig& cfg) {
  spec.validate();
  if (train.empty()) throw std::invalid_argument("empty training split");

  ProfilingResult res;
  res.classifier.spec = spec;
  res.classifier.config = cfg;

  // Every fit below sees the training split only.
  std::vector<int> y_train = derive_labels(train, spec);
  res.classifier.window =
      kvc_select(train, target_words(train, spec), cfg.kvc_top_k);

  Eigen::MatrixXd X_train = gather_columns(train, res.classifier.window.selected);
  if (cfg.use_pca) {
    res.classifier.pca =
        ml::pca_fit(X_train, cfg.pca_target_variance, cfg.pca_max_components);
    X_train = ml::pca_transform(*res.classifier.pca, X_train);
  }

  if (cfg.method == Method::Lda) {
    res.classifier.lda =
        ml::lda_fit(X_train, y_train, spec.num_classes(), cfg.lda_shrinkage);
  } else {
    Eigen::MatrixXf Xf = X_train.cast<float>();
    res.classifier.fcn = ml::fcn_train(Xf, y_train, spec.num_classes(),
                                       cfg.fcn_hidden, cfg.activation, cfg.train);
  }

  auto eval = [&](const TraceSet& ts) {
    if (ts.empty()) return std::nan("");
    return label_accuracy(res.classifier.predict(ts), derive_labels(ts, spec));
  };
  res.train_accuracy = eval(train);
  res.val_accuracy = eval(val);
  res.test_accuracy = eval(test);
  return res;
}

double majority_vote_prob(double p, int n) {
  if (n < 1 || n % 2 == 0)
    throw std::invalid_argument("vote size must be odd and positive");
  if (p < 0 || p > 1) throw std::invalid_argument("p must be in [0,1]");
  if (p == 0) return 0;
  if (p == 1) return 1;

  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(n + 1.0);
  double max_term = -HUGE_VAL;
  std::vector<double> terms;
  terms.reserve(n / 2 + 1);
  for (int k = n / 2 + 1; k <= n; ++k) {
    double lt = lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * lp +
                (n - k) * lq;
    terms.push_back(lt);
    max_term = std::max(max_term, lt);
  }
  double acc = 0;
  for (double lt : terms) acc += std::exp(lt - max_term);
  double result = std::exp(max_term) * acc;
  return std::min(result, 1.0);
}

int mtd(double p, double target) {
  if (!(p > 0.5))
    throw std::invalid_argument(
        "per-trace accuracy must exceed 0.5 for the vote to converge, got " +
        std::to_string(p));
  if (!(target > 0 && target < 1))
    throw std::invalid_argument("target must be in (0,1)");
  for (int n = 1;; n += 2)
    if (majority_vote_prob(p, n) >= target) return n;
}

MtdCurve mtd_curve(double p, double target, int max_n) {
  if (!(p > 0.5))
    throw std::invalid_argument(
        "per-trace accuracy must exceed 0.5 for the vote to converge, got " +
        std::to_string(p));
  MtdCurve curve;
  curve.mtd = -1;
  for (int n = 1; n <= max_n; n += 2) {
    double prob = majority_vote_prob(p, n);
    curve.n.push_back(n);
    curve.probability.push_back(prob);
    if (prob >= target) {
      curve.mtd = n;
      break;
    }
  }
  if (curve.mtd < 0)
    throw std::runtime_error("vote did not reach the target within " +
                             std::to_string(max_n) + " traces");
  return curve;
}

namespace {

struct InverseTables {
  std::array<uint16_t, 65536> a;
  std::array<uint16_t, 65536> b;
};

const InverseTables& inverse_tables() {
  static const InverseTables tables = [] {
    InverseTables t;
    std::array<bool, 65536> seen_a{}, seen_b{};
    for (uint32_t y = 0; y < 65536; ++y) {
      uint16_t ya = snowv::mul_x_inv(static_cast<uint16_t>(y),
                                     snowv::GfConstants::alpha_inv);
      uint16_t yb = snowv::mul_x_inv(static_cast<uint16_t>(y),
                                     snowv::GfConstants::beta_inv);
      t.a[ya] = static_cast<uint16_t>(y);
      t.b[yb] = static_cast<uint16_t>(y);
      seen_a[ya] = seen_b[yb] = true;
    }
    for (uint32_t v = 0; v < 65536; ++v)
      if (!seen_a[v] || !seen_b[v])
        throw std::logic_error("mul_x_inv is not a bijection");
    return t;
  }();
  return tables;
}

}  // namespace

uint16_t solve_word_a(uint16_t u, uint16_t a0, uint16_t a1, uint16_t b0) {
  uint16_t masked = static_cast<uint16_t>(
      u ^ snowv::mul_x(a0, snowv::GfConstants::alpha) ^ a1 ^ b0);
  return inverse_tables().a[masked];
}

uint16_t solve_word_b(uint16_t v, uint16_t b0, uint16_t b3, uint16_t a0) {
  uint16_t masked = static_cast<uint16_t>(
      v ^ snowv::mul_x(b0, snowv::GfConstants::beta) ^ b3 ^ a0);
  return inverse_tables().b[masked];
}

void TrainedBank::put(TrainedClassifier clf) {
  auto key = std::make_tuple(static_cast<int>(clf.spec.lfsr), clf.spec.step(),
                             clf.spec.high_byte ? 1 : 0);
  classifiers_.insert_or_assign(key, std::move(clf));
}

const TrainedClassifier& TrainedBank::at(Lfsr lfsr, int step, bool high_byte) const {
  auto it = classifiers_.find(
      std::make_tuple(static_cast<int>(lfsr), step, high_byte ? 1 : 0));
  if (it == classifiers_.end())
    throw std::out_of_range("no classifier for " +
                            std::string(lfsr == Lfsr::A ? "A" : "B") +
                            std::to_string(8 + step) +
                            (high_byte ? ".hi" : ".lo"));
  return it->second;
}

bool TrainedBank::complete() const { return classifiers_.size() == 32; }

WordPredictor::BytePredictions TrainedBank::predict(const TraceSet& ts, Lfsr lfsr,
                                                    int step) const {
  BytePredictions out;
  out.low = at(lfsr, step, false).predict(ts);
  out.high = at(lfsr, step, true).predict(ts);
  return out;
}

WordPredictor::BytePredictions OraclePredictor::predict(const TraceSet& ts,
                                                        Lfsr lfsr, int step) const {
  TargetSpec spec;
  spec.lfsr = lfsr;
  spec.word_index = 8 + step;
  spec.bits = 8;
  auto words = target_words(ts, spec);
  BytePredictions out;
  out.low.resize(words.size());
  out.high.resize(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    out.low[i] = words[i] & 0xff;
    out.high[i] = words[i] >> 8;
  }
  return out;
}

namespace {

// Modal value and its vote-share lead over the runner-up; ties resolve
// toward the smaller byte value.
std::pair<int, double> vote(const std::vector<int>& preds, size_t n_used) {
  std::array<uint32_t, 256> counts{};
  for (size_t i = 0; i < n_used; ++i) ++counts[preds[i] & 0xff];
  int best = 0;
  for (int v = 1; v < 256; ++v)
    if (counts[v] > counts[best]) best = v;
  uint32_t second = 0;
  for (int v = 0; v < 256; ++v)
    if (v != best) second = std::max(second, counts[v]);
  double margin =
      static_cast<double>(counts[best] - second) / static_cast<double>(n_used);
  return {best, margin};
}

}  // namespace

AttackResult recover_full_key(const WordPredictor& predictor,
                              const TraceSet& attack_traces,
                              const RecoveryOptions& opts) {
  if (attack_traces.empty())
    throw std::invalid_argument("no attack traces supplied");

  // One IV per attack run. The recurrences are solved against it.
  const auto iv = attack_traces.iv(0);
  for (size_t i = 1; i < attack_traces.size(); ++i)
    if (attack_traces.iv(i) != iv)
      throw std::invalid_argument("attack traces do not share a single IV");

  AttackResult result;
  // Odd vote size: drop the last trace of an even-sized set.
  result.traces_used = attack_traces.size() % 2 == 0 ? attack_traces.size() - 1
                                                     : attack_traces.size();
  if (result.traces_used == 0)
    throw std::invalid_argument("not enough attack traces to vote");

  std::array<uint16_t, 8> iv_words;
  for (int i = 0; i < 8; ++i)
    iv_words[i] = static_cast<uint16_t>(iv[2 * i] | (iv[2 * i + 1] << 8));

  std::array<uint16_t, 16> k{};  // recovered key words as they accumulate
  for (int step = 0; step < 8; ++step) {
    for (Lfsr side : {Lfsr::A, Lfsr::B}) {
      auto preds = predictor.predict(attack_traces, side, step);
      auto [lo, lo_margin] = vote(preds.low, result.traces_used);
      auto [hi, hi_margin] = vote(preds.high, result.traces_used);
      uint16_t feedback = static_cast<uint16_t>((hi << 8) | lo);

      WordRecovery rec;
      rec.lfsr = side;
      rec.step = step;
      rec.feedback_word = feedback;
      rec.low_margin = lo_margin;
      rec.high_margin = hi_margin;
      rec.low_confidence = lo_margin < opts.confidence_threshold ||
                           hi_margin < opts.confidence_threshold;

      if (side == Lfsr::A) {
        // u_s = mulx(a[s]) ^ a[s+1] ^ mulx_inv(a[8+s]) ^ b[s]; b[s] = 0,
        // a[s+1] is an IV word until step 7 where it is recovered k0.
        uint16_t a0 = iv_words[step];
        uint16_t a1 = step + 1 < 8 ? iv_words[step + 1] : k[0];
        rec.solved_word = solve_word_a(feedback, a0, a1, 0);
        k[step] = rec.solved_word;
      } else {
        // v_s = mulx(b[s]) ^ b[s+3] ^ mulx_inv(b[8+s]) ^ a[s]; b[s] = 0,
        // b[s+3] is zero until step 5 where it is recovered k8..k10.
        uint16_t b3 = step + 3 < 8 ? 0 : k[8 + step + 3 - 8];
        rec.solved_word = solve_word_b(feedback, 0, b3, iv_words[step]);
        k[8 + step] = rec.solved_word;
      }
      result.words.push_back(rec);
    }
  }

  result.key_words = k;
  for (int i = 0; i < 16; ++i) {
    result.key[2 * i] = static_cast<uint8_t>(k[i]);
    result.key[2 * i + 1] = static_cast<uint8_t>(k[i] >> 8);
  }

  result.ground_truth_available = attack_traces.has_keys();
  if (result.ground_truth_available) {
    const auto truth = attack_traces.key(0);
    for (size_t i = 1; i < attack_traces.size(); ++i)
      if (attack_traces.key(i) != truth)
        throw std::invalid_argument("attack traces do not share a single key");
    result.success = result.key == truth;
  }

  if (!opts.known_keystream.empty()) {
    KeyMaterial km;
    km.key = result.key;
    km.iv = iv;
    snowv::CipherState st = snowv::init(km);
    size_t blocks = (opts.known_keystream.size() + 15) / 16;
    std::vector<uint8_t> z = snowv::keystream_bytes(st, blocks);
    for (size_t i = 0; i < opts.known_keystream.size(); ++i)
      if (z[i] != opts.known_keystream[i])
        result.keystream_mismatch_positions.push_back(i);
    bool stream_ok = result.keystream_mismatch_positions.empty();
    if (result.ground_truth_available)
      result.success = result.success && stream_ok;
    else
      result.success = stream_ok;
  }
  return result;
}

std::string to_string(Method m) { return m == Method::Lda ? "lda" : "fcn"; }

Method method_from_string(const std::string& name) {
  if (name == "lda") return Method::Lda;
  if (name == "fcn") return Method::Fcn;
  throw std::invalid_argument("unknown method '" + name + "' (lda, fcn)");
}

}  // namespace svsca::attack
