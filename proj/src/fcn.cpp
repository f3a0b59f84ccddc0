#include "svsca/fcn.hpp"

#include <stdexcept>

#include "svsca/rng.hpp"

namespace svsca::ml {

const std::array<Activation, 7>& all_activations() {
  static const std::array<Activation, 7> all = {
      Activation::ReLU, Activation::LeakyReLU, Activation::PReLU,
      Activation::ELU,  Activation::SELU,      Activation::Swish,
      Activation::Mish};
  return all;
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leakyrelu";
    case Activation::PReLU: return "prelu";
    case Activation::ELU: return "elu";
    case Activation::SELU: return "selu";
    case Activation::Swish: return "swish";
    case Activation::Mish: return "mish";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  for (Activation a : all_activations())
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown activation '" + name +
                              "' (relu, leakyrelu, prelu, elu, selu, swish, mish)");
}

namespace detail {

template <typename Scalar>
Net<Scalar> Net<Scalar>::make(int input_dim, const std::vector<int>& hidden,
                              int num_classes, Activation act, uint64_t seed) {
  if (input_dim < 1 || num_classes < 2)
    throw std::invalid_argument("bad network dimensions");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("hidden layer size must be >= 1");

  Net net;
  net.activation = act;
  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(num_classes);

  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    CounterRng rng(seed, RngPurpose::WeightInit, l);
    double limit = std::sqrt(6.0 / dims[l]);
    Mat w(dims[l + 1], dims[l]);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        w(r, c) = static_cast<Scalar>((2.0 * rng.next_unit() - 1.0) * limit);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vec::Zero(dims[l + 1]));
  }
  net.prelu_slopes.assign(hidden.size(), Scalar(0.25));
  return net;
}

template <typename Scalar>
typename Net<Scalar>::Mat Net<Scalar>::forward_cols(const Mat& x) const {
  Mat a = x;
  const int L = num_layers();
  for (int l = 0; l < L; ++l) {
    Mat z = (weights[l] * a).colwise() + biases[l];
    if (l + 1 < L) {
      Scalar slope = prelu_slopes[l];
      Activation act = activation;
      a = z.unaryExpr([act, slope](Scalar v) { return act_value(act, slope, v); });
    } else {
      a = std::move(z);
    }
  }
  // Softmax with per-column max subtraction.
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    Scalar m = a.col(c).maxCoeff();
    a.col(c) = (a.col(c).array() - m).exp();
    a.col(c) /= a.col(c).sum();
  }
  return a;
}

template <typename Scalar>
double Net<Scalar>::loss_and_grads(const Mat& x, const std::vector<int>& y,
                                   Grads* grads) const {
  const int L = num_layers();
  const Eigen::Index n = x.cols();
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw std::invalid_argument("label count does not match batch");

  std::vector<Mat> zs(L);         // pre-activations
  std::vector<Mat> activations(L + 1);
  activations[0] = x;
  for (int l = 0; l < L; ++l) {
    zs[l] = (weights[l] * activations[l]).colwise() + biases[l];
    if (l + 1 < L) {
      Scalar slope = prelu_slopes[l];
      Activation act = activation;
      activations[l + 1] = zs[l].unaryExpr(
          [act, slope](Scalar v) { return act_value(act, slope, v); });
    } else {
      activations[l + 1] = zs[l];
    }
  }

  // Log-softmax loss, accumulated in double.
  const Mat& logits = activations[L];
  double loss = 0;
  Mat delta(logits.rows(), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Scalar m = logits.col(c).maxCoeff();
    Vec shifted = logits.col(c).array() - m;
    Scalar lse = std::log(shifted.array().exp().sum());
    loss += static_cast<double>(lse - shifted(y[c]));
    if (grads) {
      delta.col(c) = (shifted.array() - lse).exp();
      delta(y[c], c) -= Scalar(1);
    }
  }
  loss /= static_cast<double>(n);
  if (!grads) return loss;

  delta /= static_cast<Scalar>(n);
  grads->w.resize(L);
  grads->b.resize(L);
  grads->slope.assign(prelu_slopes.size(), Scalar(0));
  for (int l = L - 1; l >= 0; --l) {
    grads->w[l] = delta * activations[l].transpose();
    grads->b[l] = delta.rowwise().sum();
    if (l > 0) {
      Mat back = weights[l].transpose() * delta;
      Scalar slope = prelu_slopes[l - 1];
      Activation act = activation;
      if (act == Activation::PReLU) {
        Scalar ds = (back.array() *
                     zs[l - 1].unaryExpr([act](Scalar v) {
                                return act_slope_deriv(act, v);
                              }).array())
                        .sum();
        grads->slope[l - 1] = ds;
      }
      delta = back.array() * zs[l - 1]
                                 .unaryExpr([act, slope](Scalar v) {
                                   return act_deriv(act, slope, v);
                                 })
                                 .array();
    }
  }
  return loss;
}

template struct Net<float>;
template struct Net<double>;

}  // namespace detail

Eigen::MatrixXf FcnModel::forward_proba(
    const Eigen::Ref<const Eigen::MatrixXf>& X) const {
  return net.forward_cols(X.transpose()).transpose();
}

std::vector<int> FcnModel::predict(
    const Eigen::Ref<const Eigen::MatrixXf>& X) const {
  Eigen::MatrixXf proba = forward_proba(X);
  std::vector<int> labels(proba.rows());
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < proba.cols(); ++c)
      if (proba(i, c) > proba(i, best)) best = c;
    labels[i] = best;
  }
  return labels;
}

double fcn_loss(const FcnModel& m, const Eigen::Ref<const Eigen::MatrixXf>& X,
                const std::vector<int>& y) {
  Eigen::MatrixXf cols = X.transpose();
  return m.net.loss_and_grads(cols, y, nullptr);
}

FcnModel fcn_train(const Eigen::Ref<const Eigen::MatrixXf>& X,
                   const std::vector<int>& y, int num_classes,
                   const std::vector<int>& hidden, Activation act,
                   const TrainConfig& cfg, const Eigen::MatrixXf* X_val,
                   const std::vector<int>* y_val, TrainCurves* curves) {
  using Net = detail::Net<float>;
  const Eigen::Index n = X.rows();
  if (n < 1) throw std::invalid_argument("fcn_train: empty training set");
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw std::invalid_argument("fcn_train: label count does not match rows");
  for (int label : y)
    if (label < 0 || label >= num_classes)
      throw std::invalid_argument("label outside [0, num_classes)");
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("epochs and batch_size must be >= 1");
  if (!X.allFinite()) throw std::invalid_argument("fcn_train: non-finite input");

  FcnModel model;
  model.net = Net::make(static_cast<int>(X.cols()), hidden, num_classes, act,
                        cfg.seed);
  Net& net = model.net;

  // Adam state, one slot per parameter tensor (slopes at the end).
  const int L = net.num_layers();
  std::vector<Eigen::MatrixXf> mw(L), vw(L);
  std::vector<Eigen::VectorXf> mb(L), vb(L);
  std::vector<float> ms(net.prelu_slopes.size(), 0.f),
      vs(net.prelu_slopes.size(), 0.f);
  for (int l = 0; l < L; ++l) {
    mw[l].setZero(net.weights[l].rows(), net.weights[l].cols());
    vw[l] = mw[l];
    mb[l].setZero(net.biases[l].size());
    vb[l] = mb[l];
  }

  Eigen::MatrixXf cols = X.transpose();  // d x n
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;

  const float lr = static_cast<float>(cfg.learning_rate);
  const float b1 = static_cast<float>(cfg.beta1);
  const float b2 = static_cast<float>(cfg.beta2);
  const float eps = static_cast<float>(cfg.epsilon);
  long step = 0;

  if (curves) {
    curves->train_loss.clear();
    curves->val_loss.clear();
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    CounterRng shuffle(cfg.seed, RngPurpose::Shuffle, static_cast<uint64_t>(epoch));
    for (Eigen::Index i = n; i > 1; --i)
      std::swap(order[i - 1], order[shuffle.next_below(static_cast<uint64_t>(i))]);

    double epoch_loss = 0;
    Eigen::Index done = 0;
    int batch_index = 0;
    while (done < n) {
      Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n - done);
      Eigen::MatrixXf xb(cols.rows(), bs);
      std::vector<int> yb(bs);
      for (Eigen::Index j = 0; j < bs; ++j) {
        xb.col(j) = cols.col(order[done + j]);
        yb[j] = y[order[done + j]];
      }

      Net::Grads grads;
      double loss = net.loss_and_grads(xb, yb, &grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batch_index));
      epoch_loss += loss * static_cast<double>(bs);

      ++step;
      float corr1 = 1.f - std::pow(b1, static_cast<float>(step));
      float corr2 = 1.f - std::pow(b2, static_cast<float>(step));
      for (int l = 0; l < L; ++l) {
        mw[l] = b1 * mw[l] + (1.f - b1) * grads.w[l];
        vw[l] = b2 * vw[l] + (1.f - b2) * grads.w[l].cwiseProduct(grads.w[l]);
        net.weights[l].array() -=
            lr * (mw[l].array() / corr1) /
            ((vw[l].array() / corr2).sqrt() + eps);
        mb[l] = b1 * mb[l] + (1.f - b1) * grads.b[l];
        vb[l] = b2 * vb[l] + (1.f - b2) * grads.b[l].cwiseProduct(grads.b[l]);
        net.biases[l].array() -=
            lr * (mb[l].array() / corr1) /
            ((vb[l].array() / corr2).sqrt() + eps);
      }
      if (act == Activation::PReLU) {
        for (size_t s = 0; s < net.prelu_slopes.size(); ++s) {
          float g = grads.slope[s];
          ms[s] = b1 * ms[s] + (1.f - b1) * g;
          vs[s] = b2 * vs[s] + (1.f - b2) * g * g;
          net.prelu_slopes[s] -=
              lr * (ms[s] / corr1) / (std::sqrt(vs[s] / corr2) + eps);
        }
      }
      done += bs;
      ++batch_index;
    }

    if (curves) {
      curves->train_loss.push_back(epoch_loss / static_cast<double>(n));
      if (X_val && y_val && X_val->rows() > 0) {
        Eigen::MatrixXf vcols = X_val->transpose();
        curves->val_loss.push_back(net.loss_and_grads(vcols, *y_val, nullptr));
      }
    }
  }
  return model;
}

}  // namespace svsca::ml
