#pragma once

#include <Eigen/Dense>
#include <vector>

namespace svsca::ml {

// Gaussian shared-covariance classifier. Pooled within-class covariance
// is shrunk toward (tr(Sigma)/d) * I before factoring, which keeps the
// solve well posed when d approaches the per-class sample count.
struct LdaModel {
  Eigen::MatrixXd class_means;  // C x d
  Eigen::VectorXd priors;       // C, sums to 1
  double shrinkage = 1e-3;
  Eigen::MatrixXd weights;      // d x C: Sigma^-1 mu_c
  Eigen::VectorXd bias;         // C: -mu_c' Sigma^-1 mu_c / 2 + log prior_c

  int dim() const { return static_cast<int>(class_means.cols()); }
  int num_classes() const { return static_cast<int>(class_means.rows()); }
};

// Fit on rows of X labeled y in [0, num_classes). Every class needs at
// least 2 samples; violations raise std::invalid_argument naming the class.
LdaModel lda_fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const std::vector<int>& y, int num_classes,
                 double shrinkage = 1e-3);

struct LdaPrediction {
  std::vector<int> labels;
  Eigen::MatrixXd scores;  // n x C linear discriminants
};

// Argmax of the linear discriminants, ties toward the lowest class index.
LdaPrediction lda_predict(const LdaModel& m,
                          const Eigen::Ref<const Eigen::MatrixXd>& X);

}  // namespace svsca::ml
