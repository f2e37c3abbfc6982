#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cls/dataset.hpp"

namespace cls {

enum class Algorithm {
  LogReg,
  MultinomLogReg,
  Probit,
  Lda,
  Qda,
  SvmLinear,
  SvmRbf,
  SvrLinear,
  SvrRbf,
  Gbt,
  Ols,
};

/// Default configurations: C = 1, RBF gamma = 1 / (p * mean feature variance),
/// SVR epsilon = 0.1, GBT 100 rounds / depth 3 / learning rate 0.1,
/// IRLS capped at 100 iterations with tolerance 1e-8.
struct Hyperparameters {
  double c = 1.0;
  /// Unset means the data-dependent default.
  std::optional<double> gamma;
  double epsilon = 0.1;
  int rounds = 100;
  int depth = 3;
  double learning_rate = 0.1;
  int max_iter = 100;
  double tol = 1e-8;
  /// SMO stops once the maximal KKT violation drops below this.
  double smo_tol = 1e-3;
};

struct ModelSpec {
  Algorithm algorithm = Algorithm::LogReg;
  Hyperparameters hp;

  [[nodiscard]] std::string id() const;
  [[nodiscard]] bool supports(const TaskKind& task) const;
  void validate() const;
};

std::string_view algorithm_id(Algorithm algorithm);
/// Accepts the CLI ids: logreg, multinom-logreg, probit, lda, qda, svm-linear,
/// svm-rbf, svr-linear, svr-rbf, gbt, ols.
ModelSpec parse_model(std::string_view id);
/// Comma-separated list of ids.
std::vector<ModelSpec> parse_model_list(std::string_view ids);
/// The four-model library used for a task: a GLM, linear SVM, RBF SVM and GBT.
std::vector<ModelSpec> default_models(const TaskKind& task);

/// Resolves a spec for the task at hand: binary and multiclass variants of
/// logistic regression are interchangeable, and SVM/SVR ids follow the task.
ModelSpec resolve_for_task(ModelSpec spec, const TaskKind& task);

std::string to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(std::string_view json);

struct TrainingSummary {
  int iterations = 0;
  double final_objective = 0.0;
  /// Objective after each iteration/round (starting value first) for iterative solvers.
  std::vector<double> objective_trace;
  bool converged = true;
  /// Covariance ridge was applied (LDA/QDA) or Hessian regularized.
  bool regularized = false;
};

namespace detail {
class Predictor;
}

/// Immutable fitted predictor; cheap to copy and safe to share across threads.
class FittedModel {
 public:
  FittedModel(Algorithm algorithm, TaskKind task, int p, std::shared_ptr<const detail::Predictor> impl,
              TrainingSummary summary);

  [[nodiscard]] Algorithm algorithm() const { return algorithm_; }
  [[nodiscard]] const TaskKind& task() const { return task_; }
  [[nodiscard]] int dimension() const { return p_; }
  [[nodiscard]] const TrainingSummary& summary() const { return summary_; }
  [[nodiscard]] const detail::Predictor& impl() const { return *impl_; }

 private:
  Algorithm algorithm_;
  TaskKind task_;
  int p_;
  std::shared_ptr<const detail::Predictor> impl_;
  TrainingSummary summary_;
};

/// Fits a model. `weights`, when given, are nonnegative per-row instance
/// weights (rescaled internally to mean 1).
FittedModel fit(const ModelSpec& spec, const Dataset& data, std::span<const double> weights = {});

/// Class ids for classification, real values for regression.
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& x);

struct CvResult {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> fold_losses;
  /// Out-of-fold prediction for every row (NaN for rows of skipped folds).
  Eigen::VectorXd oof_predictions;
  std::vector<int> skipped_folds;
};

/// k-fold held-out loss; se = sd(per-fold losses) / sqrt(k_used). Folds whose
/// training part misses a class are skipped and recorded.
CvResult cv_error(const ModelSpec& spec, const Dataset& data, const FoldPlan& folds, LossKind loss);

/// Exposed for gradient checks: mean negative log-likelihood of binary
/// logistic regression with intercept (coef[0]) and its gradient.
double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef,
                          Eigen::VectorXd* gradient = nullptr);

/// Linear coefficients (intercept first) for LogReg/Probit/Ols models; empty otherwise.
Eigen::VectorXd linear_coefficients(const FittedModel& model);
/// Class means (one row per class) for Lda/Qda models.
Eigen::MatrixXd class_means(const FittedModel& model);

/// SMO dual solution details for SVM models (per one-vs-rest problem for multiclass).
struct SvmDualInfo {
  std::vector<double> alpha;
  std::vector<double> y;
  std::vector<double> upper_bounds;
  double max_violation = 0.0;
};
std::vector<SvmDualInfo> svm_dual_info(const FittedModel& model);

}  // namespace cls
