#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cls/dataset.hpp"
#include "cls/models.hpp"
#include "cls/synth.hpp"

namespace cls {

enum class Scheme { Single, UnweightedAvg, WeightedAvg, Ensemble, Oracle, MonteCarloOracle };

std::string_view scheme_name(Scheme scheme);
/// CLI spellings: single, avg (unweighted), wavg, ensemble.
Scheme parse_scheme(std::string_view text);

/// softmax(-lambda * cv error) over the models of one domain.
struct EnsembleWeights {
  double lambda = 500.0;
  std::vector<double> cv_errors;
  std::vector<double> weights;
};

EnsembleWeights softmax_weights(std::span<const double> cv_errors, double lambda);

struct ClsEstimate {
  double score = 0.0;
  /// Loss of the target-trained predictor on the source data.
  double e_t = 0.0;
  /// Loss of the source-trained predictor on the target data.
  double e_s = 0.0;
  Scheme scheme = Scheme::Single;
  double w = 0.5;
  std::vector<std::string> models;
  /// Per-model combination weights (scheme-dependent; empty for Single/oracles).
  std::vector<double> model_weights;
  /// Per-model CLS values for averaging schemes.
  std::vector<double> model_scores;
  std::optional<EnsembleWeights> target_weights;
  std::optional<EnsembleWeights> source_weights;
  /// Models dropped because fitting or prediction failed, with the reason.
  std::vector<std::string> excluded;
  int folds = 0;
  std::uint64_t seed = 0;
  /// Monte-Carlo standard errors (zero for non-MC schemes).
  double mc_se = 0.0;
  double e_t_se = 0.0;
  double e_s_se = 0.0;
};

std::string to_json(const ClsEstimate& estimate);

struct EstimatorOptions {
  int folds = 5;
  double lambda = 500.0;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::ZeroOne;
};

/// Everything one domain contributes to a CLS estimate: the fitted models on
/// the full domain and (optionally) their k-fold CV errors. Computing this once
/// lets a sweep reuse the target side across every similarity value.
struct DomainFit {
  std::vector<ModelSpec> models;
  std::vector<std::optional<FittedModel>> fitted;
  /// NaN when not computed or when the model failed.
  std::vector<double> cv_errors;
  std::vector<double> cv_se;
  /// Per-model CV details (fold losses, out-of-fold predictions) when computed.
  std::vector<CvResult> cv;
  std::optional<FoldPlan> folds;
  std::vector<std::string> failures;

  [[nodiscard]] bool ok(std::size_t i) const { return fitted[i].has_value(); }
};

DomainFit fit_domain(const std::vector<ModelSpec>& models, const Dataset& data, const EstimatorOptions& options,
                     bool with_cv);

/// Combines two domain fits under a scheme. Single uses the first model.
ClsEstimate cls_from_fits(Scheme scheme, const DomainFit& target_fit, const Dataset& target,
                          const DomainFit& source_fit, const Dataset& source, const EstimatorOptions& options);

/// Train on all of one domain, evaluate on all of the other.
ClsEstimate cls_single(const ModelSpec& model, const Dataset& target, const Dataset& source, LossKind loss);
ClsEstimate cls_unweighted_avg(const std::vector<ModelSpec>& models, const Dataset& target, const Dataset& source,
                               LossKind loss);
/// Convex combination of per-model CLS with w_i = (w_i^t + w_i^s) / 2.
ClsEstimate cls_weighted_avg(const std::vector<ModelSpec>& models, const Dataset& target, const Dataset& source,
                             const EstimatorOptions& options);
/// Weight-blended predictors (weighted one-hot votes for classification).
ClsEstimate cls_ensemble(const std::vector<ModelSpec>& models, const Dataset& target, const Dataset& source,
                         const EstimatorOptions& options);

/// w * e_t + (1 - w) * e_s for 0 < w < 1.
double cls_weighted_asymmetric(double w, double e_t, double e_s);

struct ProbitOracleParams {
  Eigen::VectorXd beta_t;
  Eigen::VectorXd beta_s;
  double sigma2 = 1.0;

  [[nodiscard]] double rho1() const;
  [[nodiscard]] double rho2() const;
  /// Angle between beta_t and beta_s in [0, pi].
  [[nodiscard]] double theta_beta() const;
};

/// (arccos rho1 + arccos rho2) / (2 pi).
double oracle_probit(const ProbitOracleParams& params);
/// theta / pi.
double oracle_probit_smallnoise(double theta_beta);

struct LdaOracleParams {
  Eigen::VectorXd mu_t;
  Eigen::VectorXd mu_s;

  [[nodiscard]] double cos_theta() const;
};

/// (Phi(-|mu_s| cos theta) + Phi(-|mu_t| cos theta)) / 2.
double oracle_lda(const LdaOracleParams& params);

/// Squared-error CLS of two linear models y = beta'x + eps with x ~ N(0, I):
/// |beta_t - beta_s|^2 + sigma^2.
double oracle_linear_regression(const Eigen::VectorXd& beta_t, const Eigen::VectorXd& beta_s, double sigma2);

/// Closed-form oracle CLS for the settings that have one (probit, lda, linreg).
std::optional<double> oracle_closed_form(const GeneratorSpec& target, const GeneratorSpec& source);

/// Monte-Carlo oracle: e_t is the loss of the target Bayes rule on `samples`
/// draws from the source distribution, e_s symmetric.
ClsEstimate oracle_monte_carlo(const OracleModel& target_oracle, const OracleModel& source_oracle,
                               std::size_t samples, std::uint64_t seed);

}  // namespace cls
