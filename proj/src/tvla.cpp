#include "svsca/tvla.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace svsca::tvla {

void GroupStats::resize(size_t samples) {
  n_ = 0;
  mean_.assign(samples, 0.0);
  m2_.assign(samples, 0.0);
}

void GroupStats::add(std::span<const float> trace) {
  if (trace.size() != mean_.size())
    throw std::invalid_argument("trace length does not match accumulator");
  ++n_;
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (size_t j = 0; j < trace.size(); ++j) {
    double x = trace[j];
    double d1 = x - mean_[j];
    mean_[j] += d1 * inv_n;
    m2_[j] += d1 * (x - mean_[j]);
  }
}

void GroupStats::merge(const GroupStats& other) {
  if (other.mean_.size() != mean_.size())
    throw std::invalid_argument("accumulator size mismatch");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  uint64_t n = n_ + other.n_;
  double w = static_cast<double>(n_) * static_cast<double>(other.n_) /
             static_cast<double>(n);
  for (size_t j = 0; j < mean_.size(); ++j) {
    double delta = other.mean_[j] - mean_[j];
    m2_[j] += other.m2_[j] + delta * delta * w;
    mean_[j] += delta * static_cast<double>(other.n_) / static_cast<double>(n);
  }
  n_ = n;
}

double TvlaReport::max_abs_t() const {
  double m = 0;
  for (double t : t_values) m = std::max(m, std::abs(t));
  return m;
}

TvlaReport welch_t(const GroupStats& fixed, const GroupStats& random,
                   double threshold) {
  if (fixed.count() < 2 || random.count() < 2)
    throw std::invalid_argument(
        "welch_t needs at least 2 traces per group, got fixed=" +
        std::to_string(fixed.count()) + " random=" + std::to_string(random.count()));
  if (fixed.samples() != random.samples())
    throw std::invalid_argument("group sample counts differ");

  TvlaReport rep;
  rep.threshold = threshold;
  rep.n_fixed = fixed.count();
  rep.n_random = random.count();
  rep.t_values.resize(fixed.samples());
  for (size_t j = 0; j < fixed.samples(); ++j) {
    double denom = fixed.variance(j) / static_cast<double>(fixed.count()) +
                   random.variance(j) / static_cast<double>(random.count());
    double num = fixed.mean(j) - random.mean(j);
    double t;
    if (denom == 0.0) {
      t = num == 0.0 ? 0.0
                     : std::copysign(std::numeric_limits<double>::infinity(), num);
    } else {
      t = num / std::sqrt(denom);
    }
    rep.t_values[j] = t;
    if (std::abs(t) > threshold) rep.leak_points.push_back(j);
  }
  return rep;
}

TvlaReport welch_t(const TraceSet& ts, double threshold) {
  GroupStats fixed(ts.samples_per_trace());
  GroupStats random(ts.samples_per_trace());
  for (size_t i = 0; i < ts.size(); ++i)
    (ts.fixed_flag(i) ? fixed : random).add(ts.trace(i));
  return welch_t(fixed, random, threshold);
}

void write_csv(const TvlaReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "index,t_value,is_leak\n";
  size_t next_leak = 0;
  for (size_t j = 0; j < report.t_values.size(); ++j) {
    bool leak = next_leak < report.leak_points.size() &&
                report.leak_points[next_leak] == j;
    if (leak) ++next_leak;
    f << j << ',' << report.t_values[j] << ',' << (leak ? 1 : 0) << "\n";
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace svsca::tvla
