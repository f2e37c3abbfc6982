#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "cls/models.hpp"

namespace cls::detail {

class Predictor {
 public:
  virtual ~Predictor() = default;
  /// Class ids or regression values.
  [[nodiscard]] virtual Eigen::VectorXd predict(const Eigen::MatrixXd& x) const = 0;
};

/// Real-valued scorer; OvR wrappers take the argmax over per-class scorers.
class Scorer : public Predictor {
 public:
  [[nodiscard]] virtual Eigen::VectorXd decision(const Eigen::MatrixXd& x) const = 0;
};

using FitResult = std::pair<std::shared_ptr<const Predictor>, TrainingSummary>;

/// Training inputs after task resolution: labels are dense 0..K-1 (or real),
/// weights have mean 1.
struct TrainingData {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& w;
  int classes = 0;  // 0 for regression
};

FitResult fit_logreg(const TrainingData& data, const Hyperparameters& hp);
FitResult fit_multinomial(const TrainingData& data, const Hyperparameters& hp);
FitResult fit_probit(const TrainingData& data, const Hyperparameters& hp);
FitResult fit_lda(const TrainingData& data, const Hyperparameters& hp);
FitResult fit_qda(const TrainingData& data, const Hyperparameters& hp);
FitResult fit_svc(const TrainingData& data, const Hyperparameters& hp, bool rbf);
FitResult fit_svr(const TrainingData& data, const Hyperparameters& hp, bool rbf);
FitResult fit_gbt(const TrainingData& data, const Hyperparameters& hp);
FitResult fit_ols(const TrainingData& data, const Hyperparameters& hp);

/// Binary scorer on classes {0,1} -> one-vs-rest over K classes.
template <typename BinaryFit>
FitResult fit_one_vs_rest(const TrainingData& data, BinaryFit&& fit_binary);

/// Argmax over columns, ties to the smaller index.
Eigen::VectorXd argmax_rows(const Eigen::MatrixXd& scores);

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x);

/// Linear models expose their coefficients for inspection.
class LinearScorer : public Scorer {
 public:
  explicit LinearScorer(Eigen::VectorXd coef, bool classify) : coef_(std::move(coef)), classify_(classify) {}
  [[nodiscard]] Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override {
    return (x * coef_.tail(coef_.size() - 1)).array() + coef_[0];
  }
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd d = decision(x);
    if (!classify_) return d;
    return (d.array() > 0.0).cast<double>();
  }
  [[nodiscard]] const Eigen::VectorXd& coefficients() const { return coef_; }

 private:
  Eigen::VectorXd coef_;
  bool classify_;
};

class OneVsRest : public Predictor {
 public:
  explicit OneVsRest(std::vector<std::shared_ptr<const Scorer>> members) : members_(std::move(members)) {}
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override;
  [[nodiscard]] const std::vector<std::shared_ptr<const Scorer>>& members() const { return members_; }

 private:
  std::vector<std::shared_ptr<const Scorer>> members_;
};

template <typename BinaryFit>
FitResult fit_one_vs_rest(const TrainingData& data, BinaryFit&& fit_binary) {
  std::vector<std::shared_ptr<const Scorer>> members;
  TrainingSummary total;
  total.objective_trace.clear();
  for (int c = 0; c < data.classes; ++c) {
    Eigen::VectorXd yc = (data.y.array() == static_cast<double>(c)).cast<double>();
    TrainingData sub{data.x, yc, data.w, 2};
    auto [pred, summary] = fit_binary(sub);
    auto scorer = std::dynamic_pointer_cast<const Scorer>(pred);
    members.push_back(std::move(scorer));
    total.iterations += summary.iterations;
    total.final_objective += summary.final_objective;
    total.converged = total.converged && summary.converged;
    total.regularized = total.regularized || summary.regularized;
  }
  return {std::make_shared<OneVsRest>(std::move(members)), total};
}

}  // namespace cls::detail
