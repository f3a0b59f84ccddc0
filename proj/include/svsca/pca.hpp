#pragma once

#include <Eigen/Dense>

namespace svsca::ml {

struct PcaModel {
  Eigen::VectorXd mean;             // d
  Eigen::MatrixXd components;       // k x d, rows orthonormal
  Eigen::VectorXd explained_ratio;  // k, non-increasing

  int dim() const { return static_cast<int>(mean.size()); }
  int num_components() const { return static_cast<int>(components.rows()); }
};

// Principal directions of X (rows = observations) via eigendecomposition
// of the sample covariance. Keeps the smallest k reaching
// target_variance, capped by max_components, n-1 and d.
// Throws std::invalid_argument for n < 2.
PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 double target_variance = 0.99, int max_components = 2000);

// Centered projection, rows in / rows out (n x k).
Eigen::MatrixXd pca_transform(const PcaModel& m,
                              const Eigen::Ref<const Eigen::MatrixXd>& X);

// Back-projection into the original space (adds the mean back).
Eigen::MatrixXd pca_inverse_transform(const PcaModel& m,
                                      const Eigen::Ref<const Eigen::MatrixXd>& Y);

}  // namespace svsca::ml
