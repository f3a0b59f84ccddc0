#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svsca/trace_set.hpp"

namespace svsca::tvla {

// Streaming mean/variance accumulator (Welford update, Chan merge) for
// one group of traces; mergeable so shards reduce associatively.
class GroupStats {
 public:
  explicit GroupStats(size_t samples = 0) { resize(samples); }

  void resize(size_t samples);
  size_t samples() const { return mean_.size(); }
  uint64_t count() const { return n_; }

  void add(std::span<const float> trace);
  void merge(const GroupStats& other);

  double mean(size_t j) const { return mean_[j]; }
  // Unbiased sample variance; requires count() >= 2.
  double variance(size_t j) const { return m2_[j] / static_cast<double>(n_ - 1); }

 private:
  uint64_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct TvlaReport {
  std::vector<double> t_values;
  double threshold = 4.5;
  std::vector<size_t> leak_points;  // sorted indices with |t| > threshold
  uint64_t n_fixed = 0;
  uint64_t n_random = 0;

  double max_abs_t() const;
};

// Welch's t per sample between the fixed-flag and random groups.
// Degenerate points (zero variance in both groups): t = 0 when the
// means agree, +/-inf otherwise, the latter counted as a leak.
// Throws std::invalid_argument if either group has fewer than 2 traces.
TvlaReport welch_t(const TraceSet& ts, double threshold = 4.5);

// Same test from precomputed group statistics (parallel reduction path).
TvlaReport welch_t(const GroupStats& fixed, const GroupStats& random,
                   double threshold = 4.5);

// CSV rows "index,t_value,is_leak".
void write_csv(const TvlaReport& report, const std::string& path);

}  // namespace svsca::tvla
