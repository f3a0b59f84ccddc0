#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace svsca::ml {

enum class Activation : uint8_t {
  ReLU = 0,
  LeakyReLU = 1,  // slope 0.01
  PReLU = 2,      // learned per-layer slope, init 0.25
  ELU = 3,        // alpha = 1
  SELU = 4,
  Swish = 5,
  Mish = 6,
};

const std::array<Activation, 7>& all_activations();
std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 1;
};

namespace detail {

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
constexpr double kLeakySlope = 0.01;

template <typename S>
S sigmoid(S z) {
  return z >= S(0) ? S(1) / (S(1) + std::exp(-z))
                   : std::exp(z) / (S(1) + std::exp(z));
}

template <typename S>
S softplus(S z) {
  return std::max(z, S(0)) + std::log1p(std::exp(-std::abs(z)));
}

template <typename S>
S act_value(Activation a, S slope, S z) {
  switch (a) {
    case Activation::ReLU: return z > S(0) ? z : S(0);
    case Activation::LeakyReLU: return z > S(0) ? z : S(kLeakySlope) * z;
    case Activation::PReLU: return z > S(0) ? z : slope * z;
    case Activation::ELU: return z > S(0) ? z : std::expm1(z);
    case Activation::SELU:
      return z > S(0) ? S(kSeluLambda) * z
                      : S(kSeluLambda) * S(kSeluAlpha) * std::expm1(z);
    case Activation::Swish: return z * sigmoid(z);
    case Activation::Mish: return z * std::tanh(softplus(z));
  }
  return S(0);
}

template <typename S>
S act_deriv(Activation a, S slope, S z) {
  switch (a) {
    case Activation::ReLU: return z > S(0) ? S(1) : S(0);
    case Activation::LeakyReLU: return z > S(0) ? S(1) : S(kLeakySlope);
    case Activation::PReLU: return z > S(0) ? S(1) : slope;
    case Activation::ELU: return z > S(0) ? S(1) : std::exp(z);
    case Activation::SELU:
      return z > S(0) ? S(kSeluLambda)
                      : S(kSeluLambda) * S(kSeluAlpha) * std::exp(z);
    case Activation::Swish: {
      S s = sigmoid(z);
      return s * (S(1) + z * (S(1) - s));
    }
    case Activation::Mish: {
      S sp = softplus(z);
      S t = std::tanh(sp);
      return t + z * sigmoid(z) * (S(1) - t * t);
    }
  }
  return S(0);
}

// d f / d slope; nonzero only for PReLU on the negative side.
template <typename S>
S act_slope_deriv(Activation a, S z) {
  return (a == Activation::PReLU && z <= S(0)) ? z : S(0);
}

// Dense softmax classifier network. Samples are matrix columns inside;
// the public wrappers below take row-major n x d input.
template <typename Scalar>
struct Net {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Activation activation = Activation::ReLU;
  std::vector<Mat> weights;         // L layers, out x in
  std::vector<Vec> biases;          // L
  std::vector<Scalar> prelu_slopes; // L-1 (hidden layers), used by PReLU

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int num_classes() const { return static_cast<int>(weights.back().rows()); }

  // Scaled-uniform fan-in init: U(+-sqrt(6/fan_in)); biases zero.
  static Net make(int input_dim, const std::vector<int>& hidden, int num_classes,
                  Activation act, uint64_t seed);

  // Class probabilities, columns = samples (softmax with max-subtraction).
  Mat forward_cols(const Mat& x) const;

  struct Grads {
    std::vector<Mat> w;
    std::vector<Vec> b;
    std::vector<Scalar> slope;
  };

  // Mean softmax cross-entropy over the batch; fills grads if non-null.
  double loss_and_grads(const Mat& x, const std::vector<int>& y,
                        Grads* grads) const;
};

extern template struct Net<float>;
extern template struct Net<double>;

}  // namespace detail

struct TrainCurves {
  std::vector<double> train_loss;
  std::vector<double> val_loss;  // empty when no validation set given
};

// Softmax classifier with the trained float network.
struct FcnModel {
  detail::Net<float> net;

  int input_dim() const { return net.input_dim(); }
  int num_classes() const { return net.num_classes(); }
  Activation activation() const { return net.activation; }

  // Rows = samples.
  Eigen::MatrixXf forward_proba(const Eigen::Ref<const Eigen::MatrixXf>& X) const;
  std::vector<int> predict(const Eigen::Ref<const Eigen::MatrixXf>& X) const;
};

// Mini-batch Adam on softmax cross-entropy. Deterministic for a fixed
// config: seeded init and per-epoch shuffles, fixed batch order.
// Throws std::runtime_error naming epoch and batch if the loss leaves
// the finite range.
FcnModel fcn_train(const Eigen::Ref<const Eigen::MatrixXf>& X,
                   const std::vector<int>& y, int num_classes,
                   const std::vector<int>& hidden, Activation act,
                   const TrainConfig& cfg,
                   const Eigen::MatrixXf* X_val = nullptr,
                   const std::vector<int>* y_val = nullptr,
                   TrainCurves* curves = nullptr);

// Mean softmax cross-entropy of the model on a labeled set.
double fcn_loss(const FcnModel& m, const Eigen::Ref<const Eigen::MatrixXf>& X,
                const std::vector<int>& y);

}  // namespace svsca::ml
