#include "svsca/lda.hpp"

#include <stdexcept>

namespace svsca::ml {

LdaModel lda_fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const std::vector<int>& y, int num_classes, double shrinkage) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (num_classes < 2) throw std::invalid_argument("lda_fit needs >= 2 classes");
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw std::invalid_argument("lda_fit: label count does not match rows");
  if (shrinkage < 0 || shrinkage > 1)
    throw std::invalid_argument("shrinkage must be in [0,1]");

  std::vector<Eigen::Index> counts(num_classes, 0);
  for (int label : y) {
    if (label < 0 || label >= num_classes)
      throw std::invalid_argument("label " + std::to_string(label) +
                                  " outside [0," + std::to_string(num_classes) + ")");
    ++counts[label];
  }
  for (int c = 0; c < num_classes; ++c)
    if (counts[c] < 2)
      throw std::invalid_argument("class " + std::to_string(c) + " has " +
                                  std::to_string(counts[c]) +
                                  " samples; need at least 2");

  LdaModel m;
  m.shrinkage = shrinkage;
  m.class_means = Eigen::MatrixXd::Zero(num_classes, d);
  for (Eigen::Index i = 0; i < n; ++i) m.class_means.row(y[i]) += X.row(i);
  for (int c = 0; c < num_classes; ++c)
    m.class_means.row(c) /= static_cast<double>(counts[c]);

  m.priors.resize(num_classes);
  for (int c = 0; c < num_classes; ++c)
    m.priors(c) = static_cast<double>(counts[c]) / static_cast<double>(n);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd dev = X.row(i) - m.class_means.row(y[i]);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(dev);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n - num_classes);

  double ridge = cov.trace() / static_cast<double>(d);
  Eigen::MatrixXd reg = (1.0 - shrinkage) * cov +
                        shrinkage * ridge * Eigen::MatrixXd::Identity(d, d);

  Eigen::LDLT<Eigen::MatrixXd> factor(reg);
  if (factor.info() != Eigen::Success)
    throw std::runtime_error("lda_fit: covariance factorization failed");

  m.weights = factor.solve(m.class_means.transpose());
  m.bias.resize(num_classes);
  for (int c = 0; c < num_classes; ++c)
    m.bias(c) = -0.5 * m.class_means.row(c).dot(m.weights.col(c)) +
                std::log(m.priors(c));
  return m;
}

LdaPrediction lda_predict(const LdaModel& m,
                          const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.cols() != m.dim())
    throw std::invalid_argument("lda_predict: dimension mismatch");
  LdaPrediction out;
  out.scores = (X * m.weights).rowwise() + m.bias.transpose();
  out.labels.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < m.num_classes(); ++c)
      if (out.scores(i, c) > out.scores(i, best)) best = c;
    out.labels[i] = best;
  }
  return out;
}

}  // namespace svsca::ml
