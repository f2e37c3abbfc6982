#pragma once

#include <Eigen/Dense>
#include <vector>

#include "models_internal.hpp"

namespace cls::detail {

class Discriminant : public Predictor {
 public:
  Discriminant(Eigen::MatrixXd means, std::vector<Eigen::LLT<Eigen::MatrixXd>> factors, std::vector<double> log_dets,
               Eigen::VectorXd log_priors)
      : means_(std::move(means)),
        factors_(std::move(factors)),
        log_dets_(std::move(log_dets)),
        log_priors_(std::move(log_priors)) {}

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override;
  [[nodiscard]] const Eigen::MatrixXd& means() const { return means_; }

 private:
  Eigen::MatrixXd means_;
  // One factor for LDA, one per class for QDA.
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  std::vector<double> log_dets_;
  Eigen::VectorXd log_priors_;
};

FitResult fit_discriminant(const TrainingData& data, bool shared);

}  // namespace cls::detail
