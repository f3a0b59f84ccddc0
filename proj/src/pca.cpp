#include "svsca/pca.hpp"

#include <stdexcept>

namespace svsca::ml {

PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 double target_variance, int max_components) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2)
    throw std::invalid_argument("pca_fit needs at least 2 rows, got " +
                                std::to_string(n));
  if (max_components < 1) throw std::invalid_argument("max_components must be >= 1");

  PcaModel m;
  m.mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - m.mean.transpose();
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("pca_fit: eigendecomposition failed");

  // Ascending eigenvalues; walk from the back. Clamp tiny negatives.
  Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  double total = lambda.sum();

  int limit = static_cast<int>(std::min<Eigen::Index>(
      {static_cast<Eigen::Index>(max_components), n - 1, d}));
  limit = std::max(limit, 1);

  int k = 0;
  double acc = 0;
  for (int i = 0; i < limit; ++i) {
    acc += lambda(d - 1 - i);
    ++k;
    if (total > 0 && acc >= target_variance * total) break;
  }

  m.components.resize(k, d);
  m.explained_ratio.resize(k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - i);
    // Deterministic sign: largest-magnitude coefficient positive.
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    m.components.row(i) = v.transpose();
    m.explained_ratio(i) = total > 0 ? lambda(d - 1 - i) / total : 0.0;
  }
  return m;
}

Eigen::MatrixXd pca_transform(const PcaModel& m,
                              const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.cols() != m.mean.size())
    throw std::invalid_argument("pca_transform: dimension mismatch");
  return (X.rowwise() - m.mean.transpose()) * m.components.transpose();
}

Eigen::MatrixXd pca_inverse_transform(const PcaModel& m,
                                      const Eigen::Ref<const Eigen::MatrixXd>& Y) {
  if (Y.cols() != m.components.rows())
    throw std::invalid_argument("pca_inverse_transform: dimension mismatch");
  return (Y * m.components).rowwise() + m.mean.transpose();
}

}  // namespace svsca::ml
