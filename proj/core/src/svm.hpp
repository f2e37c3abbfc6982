#pragma once

#include <Eigen/Dense>

#include "models_internal.hpp"

namespace cls::detail {

/// Decision function sum_i coef_i K(x_i, x) - rho; linear kernels keep the
/// collapsed weight vector instead of support vectors.
class KernelMachine : public Scorer {
 public:
  KernelMachine(bool rbf, bool classify, double gamma, double rho, SvmDualInfo info)
      : rbf_(rbf), classify_(classify), gamma_(gamma), rho_(rho), info_(std::move(info)) {}

  void set_support(Eigen::MatrixXd support, Eigen::VectorXd coef) {
    support_ = std::move(support);
    support_coef_ = std::move(coef);
  }
  void set_linear(Eigen::VectorXd weights) { linear_weights_ = std::move(weights); }

  [[nodiscard]] Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override;
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override;
  [[nodiscard]] const SvmDualInfo& dual() const { return info_; }
  [[nodiscard]] bool is_linear() const { return !rbf_; }
  [[nodiscard]] const Eigen::VectorXd& linear_weights() const { return linear_weights_; }
  [[nodiscard]] double rho() const { return rho_; }

 private:
  bool rbf_;
  bool classify_;
  double gamma_;
  double rho_;
  SvmDualInfo info_;
  Eigen::MatrixXd support_;
  Eigen::VectorXd support_coef_;
  Eigen::VectorXd linear_weights_;
};

FitResult fit_kernel_machine(const TrainingData& data, const Hyperparameters& hp, bool rbf, bool classify);

}  // namespace cls::detail
