#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svsca {

// One simulated power trace with the inputs that produced it.
struct Trace {
  std::vector<float> samples;
  std::array<uint8_t, 32> key{};
  std::array<uint8_t, 16> iv{};
  bool fixed_flag = false;
};

// A campaign of traces, column count fixed across the set. Stored
// structure-of-arrays with one contiguous sample buffer so analyses can
// map it as an n x d matrix without copying.
class TraceSet {
 public:
  TraceSet() = default;
  explicit TraceSet(uint32_t samples_per_trace, bool with_keys = true)
      : samples_per_trace_(samples_per_trace), has_keys_(with_keys) {}

  size_t size() const { return ivs_.size(); }
  bool empty() const { return ivs_.empty(); }
  uint32_t samples_per_trace() const { return samples_per_trace_; }
  bool has_keys() const { return has_keys_; }

  void push_back(const Trace& t);

  std::span<const float> trace(size_t i) const {
    return {samples_.data() + i * samples_per_trace_, samples_per_trace_};
  }
  std::span<float> trace(size_t i) {
    return {samples_.data() + i * samples_per_trace_, samples_per_trace_};
  }
  const std::vector<float>& samples() const { return samples_; }
  const std::array<uint8_t, 32>& key(size_t i) const { return keys_.at(i); }
  const std::array<uint8_t, 16>& iv(size_t i) const { return ivs_.at(i); }
  bool fixed_flag(size_t i) const { return fixed_flags_[i] != 0; }

  TraceSet select(const std::vector<size_t>& indices) const;

  friend bool operator==(const TraceSet&, const TraceSet&) = default;

 private:
  uint32_t samples_per_trace_ = 0;
  bool has_keys_ = true;
  std::vector<float> samples_;
  std::vector<std::array<uint8_t, 32>> keys_;
  std::vector<std::array<uint8_t, 16>> ivs_;
  std::vector<uint8_t> fixed_flags_;
};

// Thrown on malformed SVTR input; offset is the file position of the
// first byte that failed validation.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, uint64_t offset);
  uint64_t offset() const { return offset_; }

 private:
  uint64_t offset_;
};

// SVTR v1 container, little endian throughout:
//   "SVTR" | u32 version | u64 trace_count | u32 samples_per_trace |
//   u32 flags (bit 0: per-trace keys present)
// then per trace: iv[16] | key[32 if flagged] | fixed_flag u8 |
// samples_per_trace x f32.
void save_svtr(const TraceSet& ts, const std::string& path);
TraceSet load_svtr(const std::string& path);

// Plain-text export: header "iv,key,fixed,s0..sN", hex inputs, one row
// per trace.
void export_csv(const TraceSet& ts, const std::string& path);

// Fractional split, floor-rounded with the remainder assigned to train.
struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.0;
  double test_frac = 0.2;
  uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  TraceSet train, val, test;
};

// Seeded shuffle then contiguous partition.
SplitResult split(const TraceSet& ts, const SplitSpec& spec);

}  // namespace svsca
