#include "svsca/trace_set.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "svsca/rng.hpp"

namespace svsca {

namespace {

constexpr char kMagic[4] = {'S', 'V', 'T', 'R'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kFlagKeys = 1u;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  uint64_t offset() const { return off_; }

  void need(size_t n, const char* what) const {
    if (off_ + n > size_)
      throw FormatError(std::string("truncated file while reading ") + what, off_);
  }
  const uint8_t* take(size_t n, const char* what) {
    need(n, what);
    const uint8_t* p = data_ + off_;
    off_ += n;
    return p;
  }
  uint32_t u32(const char* what) {
    const uint8_t* p = take(4, what);
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  }
  uint64_t u64(const char* what) {
    uint64_t lo = u32(what);
    uint64_t hi = u32(what);
    return lo | (hi << 32);
  }

 private:
  const uint8_t* data_;
  size_t size_;
  uint64_t off_ = 0;
};

}  // namespace

void TraceSet::push_back(const Trace& t) {
  if (ivs_.empty() && samples_per_trace_ == 0)
    samples_per_trace_ = static_cast<uint32_t>(t.samples.size());
  if (t.samples.size() != samples_per_trace_)
    throw std::invalid_argument("trace length mismatch: expected " +
                                std::to_string(samples_per_trace_) + ", got " +
                                std::to_string(t.samples.size()));
  samples_.insert(samples_.end(), t.samples.begin(), t.samples.end());
  if (has_keys_) keys_.push_back(t.key);
  ivs_.push_back(t.iv);
  fixed_flags_.push_back(t.fixed_flag ? 1 : 0);
}

TraceSet TraceSet::select(const std::vector<size_t>& indices) const {
  TraceSet out(samples_per_trace_, has_keys_);
  out.samples_.reserve(indices.size() * samples_per_trace_);
  for (size_t i : indices) {
    auto row = trace(i);
    out.samples_.insert(out.samples_.end(), row.begin(), row.end());
    if (has_keys_) out.keys_.push_back(keys_.at(i));
    out.ivs_.push_back(ivs_.at(i));
    out.fixed_flags_.push_back(fixed_flags_.at(i));
  }
  return out;
}

FormatError::FormatError(const std::string& what, uint64_t offset)
    : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

void save_svtr(const TraceSet& ts, const std::string& path) {
  std::string out;
  const uint32_t spt = ts.samples_per_trace();
  out.reserve(24 + ts.size() * (16 + (ts.has_keys() ? 32 : 0) + 1 + 4ull * spt));
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, ts.size());
  put_u32(out, spt);
  put_u32(out, ts.has_keys() ? kFlagKeys : 0);
  for (size_t i = 0; i < ts.size(); ++i) {
    out.append(reinterpret_cast<const char*>(ts.iv(i).data()), 16);
    if (ts.has_keys())
      out.append(reinterpret_cast<const char*>(ts.key(i).data()), 32);
    out.push_back(ts.fixed_flag(i) ? 1 : 0);
    for (float s : ts.trace(i)) {
      uint32_t bits;
      std::memcpy(&bits, &s, 4);
      put_u32(out, bits);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

TraceSet load_svtr(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::streamsize size = f.tellg();
  f.seekg(0);
  std::vector<uint8_t> raw(static_cast<size_t>(size));
  if (size > 0) f.read(reinterpret_cast<char*>(raw.data()), size);
  if (!f) throw std::runtime_error("read failed: " + path);

  Reader r(raw.data(), raw.size());
  const uint8_t* magic = r.take(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad magic, not an SVTR file", 0);
  uint64_t version_off = r.offset();
  uint32_t version = r.u32("version");
  if (version != kVersion)
    throw FormatError("unsupported SVTR version " + std::to_string(version),
                      version_off);
  uint64_t count = r.u64("trace count");
  uint32_t spt = r.u32("samples per trace");
  uint32_t flags = r.u32("flags");
  bool with_keys = (flags & kFlagKeys) != 0;

  uint64_t per_trace = 16ull + (with_keys ? 32 : 0) + 1 + 4ull * spt;
  if (raw.size() != 24 + count * per_trace)
    throw FormatError("file length " + std::to_string(raw.size()) +
                          " does not match declared contents " +
                          std::to_string(24 + count * per_trace),
                      raw.size());

  TraceSet ts(spt, with_keys);
  Trace t;
  t.samples.resize(spt);
  for (uint64_t i = 0; i < count; ++i) {
    std::memcpy(t.iv.data(), r.take(16, "iv"), 16);
    if (with_keys) std::memcpy(t.key.data(), r.take(32, "key"), 32);
    t.fixed_flag = *r.take(1, "fixed flag") != 0;
    const uint8_t* p = r.take(4ull * spt, "samples");
    for (uint32_t j = 0; j < spt; ++j) {
      uint32_t bits = static_cast<uint32_t>(p[4 * j]) |
                      (static_cast<uint32_t>(p[4 * j + 1]) << 8) |
                      (static_cast<uint32_t>(p[4 * j + 2]) << 16) |
                      (static_cast<uint32_t>(p[4 * j + 3]) << 24);
      std::memcpy(&t.samples[j], &bits, 4);
    }
    ts.push_back(t);
  }
  return ts;
}

void export_csv(const TraceSet& ts, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "iv,key,fixed";
  for (uint32_t j = 0; j < ts.samples_per_trace(); ++j) f << ",s" << j;
  f << "\n";
  static const char* digits = "0123456789abcdef";
  auto hex = [](const uint8_t* p, size_t n) {
    std::string s;
    s.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
      s.push_back(digits[p[i] >> 4]);
      s.push_back(digits[p[i] & 0xf]);
    }
    return s;
  };
  char buf[64];
  for (size_t i = 0; i < ts.size(); ++i) {
    f << hex(ts.iv(i).data(), 16) << ',';
    if (ts.has_keys()) f << hex(ts.key(i).data(), 32);
    f << ',' << (ts.fixed_flag(i) ? 1 : 0);
    for (float s : ts.trace(i)) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(s));
      f << ',' << buf;
    }
    f << "\n";
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

void SplitSpec::validate() const {
  if (train_frac < 0 || val_frac < 0 || test_frac < 0)
    throw std::invalid_argument("split fractions must be non-negative");
  double sum = train_frac + val_frac + test_frac;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1, got " +
                                std::to_string(sum));
}

SplitResult split(const TraceSet& ts, const SplitSpec& spec) {
  spec.validate();
  const size_t n = ts.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  CounterRng rng(spec.seed, RngPurpose::Shuffle, 0);
  for (size_t i = n; i > 1; --i) {
    size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }

  size_t n_val = static_cast<size_t>(std::floor(spec.val_frac * n));
  size_t n_test = static_cast<size_t>(std::floor(spec.test_frac * n));
  size_t n_train = static_cast<size_t>(std::floor(spec.train_frac * n));
  n_train += n - n_train - n_val - n_test;  // remainder goes to train

  SplitResult out;
  auto slice = [&](size_t begin, size_t count) {
    std::vector<size_t> idx(order.begin() + begin, order.begin() + begin + count);
    return ts.select(idx);
  };
  out.train = slice(0, n_train);
  out.val = slice(n_train, n_val);
  out.test = slice(n_train + n_val, n_test);
  return out;
}

}  // namespace svsca
