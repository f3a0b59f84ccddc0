#include "svsca/model_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace svsca::ml {

namespace {

constexpr char kMagic[4] = {'S', 'V', 'M', 'L'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u32(static_cast<uint32_t>(bits));
    u32(static_cast<uint32_t>(bits >> 32));
  }
  void matrix_f64(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  void vector_f64(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  void matrix_f32(const Eigen::MatrixXf& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f32(m(r, c));
  }

  void dump(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    buf_.assign(std::istreambuf_iterator<char>(f), {});
  }

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(buf_[off_++]);
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<uint8_t>(buf_[off_++])) << (8 * i);
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    uint64_t lo = u32();
    uint64_t hi = u32();
    uint64_t bits = lo | (hi << 32);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  Eigen::MatrixXd matrix_f64(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    return m;
  }
  Eigen::VectorXd vector_f64(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }
  Eigen::MatrixXf matrix_f32(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXf m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f32();
    return m;
  }

  ModelKind header() {
    need(4);
    if (std::memcmp(buf_.data(), kMagic, 4) != 0)
      throw std::runtime_error(path_ + ": not a model file (bad magic)");
    off_ = 4;
    uint32_t version = u32();
    if (version != kVersion)
      throw std::runtime_error(path_ + ": unsupported model version " +
                               std::to_string(version));
    return static_cast<ModelKind>(u8());
  }

  void expect_kind(ModelKind want) {
    ModelKind got = header();
    if (got != want)
      throw std::runtime_error(path_ + ": wrong model kind (tag " +
                               std::to_string(static_cast<int>(got)) + ")");
  }

 private:
  void need(size_t n) const {
    if (off_ + n > buf_.size())
      throw std::runtime_error(path_ + ": truncated model file at byte " +
                               std::to_string(off_));
  }

  std::string path_;
  std::string buf_;
  size_t off_ = 0;
};

Writer header(ModelKind kind) {
  Writer w;
  w.u8('S');
  w.u8('V');
  w.u8('M');
  w.u8('L');
  w.u32(kVersion);
  w.u8(static_cast<uint8_t>(kind));
  return w;
}

}  // namespace

void save_model(const PcaModel& m, const std::string& path) {
  Writer w = header(ModelKind::Pca);
  w.u32(static_cast<uint32_t>(m.dim()));
  w.u32(static_cast<uint32_t>(m.num_components()));
  w.vector_f64(m.mean);
  w.matrix_f64(m.components);
  w.vector_f64(m.explained_ratio);
  w.dump(path);
}

void save_model(const LdaModel& m, const std::string& path) {
  Writer w = header(ModelKind::Lda);
  w.u32(static_cast<uint32_t>(m.num_classes()));
  w.u32(static_cast<uint32_t>(m.dim()));
  w.f64(m.shrinkage);
  w.matrix_f64(m.class_means);
  w.vector_f64(m.priors);
  w.matrix_f64(m.weights);
  w.vector_f64(m.bias);
  w.dump(path);
}

void save_model(const FcnModel& m, const std::string& path) {
  Writer w = header(ModelKind::Fcn);
  const auto& net = m.net;
  w.u8(static_cast<uint8_t>(net.activation));
  w.u32(static_cast<uint32_t>(net.num_layers()));
  w.u32(static_cast<uint32_t>(net.input_dim()));
  for (const auto& wl : net.weights) w.u32(static_cast<uint32_t>(wl.rows()));
  for (size_t l = 0; l < net.weights.size(); ++l) {
    w.matrix_f32(net.weights[l]);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
      w.f32(net.biases[l](i));
  }
  for (float s : net.prelu_slopes) w.f32(s);
  w.dump(path);
}

ModelKind peek_model_kind(const std::string& path) {
  Reader r(path);
  return r.header();
}

PcaModel load_pca(const std::string& path) {
  Reader r(path);
  r.expect_kind(ModelKind::Pca);
  uint32_t d = r.u32();
  uint32_t k = r.u32();
  PcaModel m;
  m.mean = r.vector_f64(d);
  m.components = r.matrix_f64(k, d);
  m.explained_ratio = r.vector_f64(k);
  return m;
}

LdaModel load_lda(const std::string& path) {
  Reader r(path);
  r.expect_kind(ModelKind::Lda);
  uint32_t C = r.u32();
  uint32_t d = r.u32();
  LdaModel m;
  m.shrinkage = r.f64();
  m.class_means = r.matrix_f64(C, d);
  m.priors = r.vector_f64(C);
  m.weights = r.matrix_f64(d, C);
  m.bias = r.vector_f64(C);
  return m;
}

FcnModel load_fcn(const std::string& path) {
  Reader r(path);
  r.expect_kind(ModelKind::Fcn);
  FcnModel m;
  m.net.activation = static_cast<Activation>(r.u8());
  uint32_t L = r.u32();
  uint32_t in = r.u32();
  std::vector<uint32_t> outs(L);
  for (auto& o : outs) o = r.u32();
  uint32_t prev = in;
  for (uint32_t l = 0; l < L; ++l) {
    m.net.weights.push_back(r.matrix_f32(outs[l], prev));
    Eigen::VectorXf b(outs[l]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = r.f32();
    m.net.biases.push_back(std::move(b));
    prev = outs[l];
  }
  m.net.prelu_slopes.resize(L > 0 ? L - 1 : 0);
  for (auto& s : m.net.prelu_slopes) s = r.f32();
  return m;
}

}  // namespace svsca::ml
