#include "cls/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "cls/error.hpp"
#include "cls/numeric.hpp"
#include "cls/rng.hpp"

namespace cls {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pair(const Dataset& target, const Dataset& source, LossKind loss) {
  require(target.task() == source.task(), "CLS: target task " + target.task().name() + " differs from source task " +
                                              source.task().name());
  require(target.cols() == source.cols(), "CLS: target has " + std::to_string(target.cols()) +
                                              " features, source has " + std::to_string(source.cols()));
  require(!target.is_empty() && !source.is_empty(), "CLS: datasets must be non-empty");
  check_loss(target.task(), loss);
}

double evaluate(const FittedModel& model, const Dataset& data, LossKind loss) {
  return mean_loss(predict(model, data.features()), data.labels(), loss);
}

// Weighted blend of member predictions: one-hot votes for classification,
// weighted mean for regression.
Eigen::VectorXd blend(const DomainFit& fit, const std::vector<std::size_t>& members, const std::vector<double>& weights,
                      const Dataset& data) {
  const TaskKind& task = data.task();
  const auto m = static_cast<Eigen::Index>(data.rows());
  if (!task.is_classification()) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    for (std::size_t r = 0; r < members.size(); ++r) {
      out += weights[r] * predict(*fit.fitted[members[r]], data.features());
    }
    return out;
  }
  Eigen::MatrixXd votes = Eigen::MatrixXd::Zero(m, task.num_classes());
  for (std::size_t r = 0; r < members.size(); ++r) {
    const Eigen::VectorXd pred = predict(*fit.fitted[members[r]], data.features());
    for (Eigen::Index i = 0; i < m; ++i) votes(i, static_cast<Eigen::Index>(pred[i])) += weights[r];
  }
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < votes.cols(); ++c) {
      if (votes(i, c) > votes(i, best)) best = c;
    }
    out[i] = static_cast<double>(best);
  }
  return out;
}

EstimatorOptions domain_options(const EstimatorOptions& options, std::uint64_t stream) {
  EstimatorOptions out = options;
  out.seed = derive_seed(options.seed, stream);
  return out;
}

constexpr std::uint64_t kTargetStream = 0x7A;
constexpr std::uint64_t kSourceStream = 0x5C;

std::vector<ModelSpec> resolved(const std::vector<ModelSpec>& models, const TaskKind& task) {
  require(!models.empty(), "CLS: at least one model is required");
  std::vector<ModelSpec> out;
  for (const auto& m : models) out.push_back(resolve_for_task(m, task));
  return out;
}

ClsEstimate run_scheme(Scheme scheme, const std::vector<ModelSpec>& models, const Dataset& target,
                       const Dataset& source, const EstimatorOptions& options) {
  check_pair(target, source, options.loss);
  const bool cv = scheme == Scheme::WeightedAvg || scheme == Scheme::Ensemble;
  const auto specs = resolved(models, target.task());
  const DomainFit tf = fit_domain(specs, target, domain_options(options, kTargetStream), cv);
  const DomainFit sf = fit_domain(specs, source, domain_options(options, kSourceStream), cv);
  return cls_from_fits(scheme, tf, target, sf, source, options);
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Single: return "single";
    case Scheme::UnweightedAvg: return "avg";
    case Scheme::WeightedAvg: return "wavg";
    case Scheme::Ensemble: return "ensemble";
    case Scheme::Oracle: return "oracle";
    case Scheme::MonteCarloOracle: return "mc-oracle";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view text) {
  for (Scheme s : {Scheme::Single, Scheme::UnweightedAvg, Scheme::WeightedAvg, Scheme::Ensemble}) {
    if (scheme_name(s) == text) return s;
  }
  fail(ErrorKind::InvalidArgument, "unknown scheme '" + std::string(text) + "' (expected single|avg|wavg|ensemble)");
}

EnsembleWeights softmax_weights(std::span<const double> cv_errors, double lambda) {
  require(!cv_errors.empty(), "softmax_weights: no models");
  require(std::isfinite(lambda) && lambda >= 0, "softmax_weights: lambda must be finite and nonnegative");
  EnsembleWeights out;
  out.lambda = lambda;
  out.cv_errors.assign(cv_errors.begin(), cv_errors.end());
  const double best = *std::min_element(cv_errors.begin(), cv_errors.end());
  double total = 0.0;
  for (double e : cv_errors) {
    require(std::isfinite(e), "softmax_weights: non-finite cv error", ErrorKind::Numeric);
    out.weights.push_back(std::exp(-lambda * (e - best)));
    total += out.weights.back();
  }
  for (double& w : out.weights) w /= total;
  return out;
}

double cls_weighted_asymmetric(double w, double e_t, double e_s) {
  require(w > 0.0 && w < 1.0, "CLS_w: weight must lie in (0, 1), got " + std::to_string(w));
  return w * e_t + (1.0 - w) * e_s;
}

DomainFit fit_domain(const std::vector<ModelSpec>& models, const Dataset& data, const EstimatorOptions& options,
                     bool with_cv) {
  DomainFit out;
  out.models = models;
  out.fitted.resize(models.size());
  out.cv_errors.assign(models.size(), kNaN);
  out.cv_se.assign(models.size(), kNaN);
  out.cv.resize(models.size());
  if (with_cv) out.folds = make_folds(data, options.folds, options.seed);
  for (std::size_t i = 0; i < models.size(); ++i) {
    try {
      out.fitted[i] = fit(models[i], data);
      if (out.folds) {
        out.cv[i] = cv_error(models[i], data, *out.folds, options.loss);
        out.cv_errors[i] = out.cv[i].mean;
        out.cv_se[i] = out.cv[i].se;
      }
    } catch (const Error& e) {
      // Invalid specs and unsupported tasks are caller mistakes, not model failures.
      if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::UnsupportedTask) throw;
      out.fitted[i].reset();
      out.failures.push_back(models[i].id() + ": " + e.what());
    }
  }
  return out;
}

ClsEstimate cls_from_fits(Scheme scheme, const DomainFit& tf, const Dataset& target, const DomainFit& sf,
                          const Dataset& source, const EstimatorOptions& options) {
  check_pair(target, source, options.loss);
  require(tf.models.size() == sf.models.size() && !tf.models.empty(), "CLS: domain fits disagree on the model list");
  ClsEstimate est;
  est.scheme = scheme;
  est.seed = options.seed;
  est.excluded = tf.failures;
  est.excluded.insert(est.excluded.end(), sf.failures.begin(), sf.failures.end());

  if (scheme == Scheme::Single) {
    if (!tf.ok(0) || !sf.ok(0)) {
      fail(ErrorKind::Numeric, "CLS: model " + tf.models[0].id() + " failed to fit: " +
                                   (est.excluded.empty() ? std::string("unknown") : est.excluded.front()));
    }
    est.models = {tf.models[0].id()};
    est.e_t = evaluate(*tf.fitted[0], source, options.loss);
    est.e_s = evaluate(*sf.fitted[0], target, options.loss);
    est.score = 0.5 * (est.e_t + est.e_s);
    return est;
  }

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < tf.models.size(); ++i) {
    if (tf.ok(i) && sf.ok(i)) usable.push_back(i);
  }
  if (usable.empty()) fail(ErrorKind::Numeric, "CLS: every model failed to fit");
  for (auto i : usable) est.models.push_back(tf.models[i].id());

  std::vector<double> wt, ws;
  if (scheme == Scheme::WeightedAvg || scheme == Scheme::Ensemble) {
    std::vector<double> et, es;
    for (auto i : usable) {
      require(std::isfinite(tf.cv_errors[i]) && std::isfinite(sf.cv_errors[i]),
              "CLS: weighted schemes need cross-validation errors on both domains");
      et.push_back(tf.cv_errors[i]);
      es.push_back(sf.cv_errors[i]);
    }
    est.target_weights = softmax_weights(et, options.lambda);
    est.source_weights = softmax_weights(es, options.lambda);
    est.folds = options.folds;
    wt = est.target_weights->weights;
    ws = est.source_weights->weights;
  }

  if (scheme == Scheme::Ensemble) {
    est.e_t = mean_loss(blend(tf, usable, wt, source), source.labels(), options.loss);
    est.e_s = mean_loss(blend(sf, usable, ws, target), target.labels(), options.loss);
    est.score = 0.5 * (est.e_t + est.e_s);
    return est;
  }

  require(scheme == Scheme::UnweightedAvg || scheme == Scheme::WeightedAvg,
          "CLS: scheme " + std::string(scheme_name(scheme)) + " is not a model-based estimator");
  const auto m = usable.size();
  for (std::size_t r = 0; r < m; ++r) {
    est.model_weights.push_back(scheme == Scheme::WeightedAvg ? 0.5 * (wt[r] + ws[r]) : 1.0 / static_cast<double>(m));
  }
  for (std::size_t r = 0; r < m; ++r) {
    const auto i = usable[r];
    const double et = evaluate(*tf.fitted[i], source, options.loss);
    const double es = evaluate(*sf.fitted[i], target, options.loss);
    est.model_scores.push_back(0.5 * (et + es));
    est.e_t += est.model_weights[r] * et;
    est.e_s += est.model_weights[r] * es;
  }
  est.score = 0.5 * (est.e_t + est.e_s);
  return est;
}

ClsEstimate cls_single(const ModelSpec& model, const Dataset& target, const Dataset& source, LossKind loss) {
  EstimatorOptions options;
  options.loss = loss;
  return run_scheme(Scheme::Single, {model}, target, source, options);
}

ClsEstimate cls_unweighted_avg(const std::vector<ModelSpec>& models, const Dataset& target, const Dataset& source,
                               LossKind loss) {
  EstimatorOptions options;
  options.loss = loss;
  return run_scheme(Scheme::UnweightedAvg, models, target, source, options);
}

ClsEstimate cls_weighted_avg(const std::vector<ModelSpec>& models, const Dataset& target, const Dataset& source,
                             const EstimatorOptions& options) {
  return run_scheme(Scheme::WeightedAvg, models, target, source, options);
}

ClsEstimate cls_ensemble(const std::vector<ModelSpec>& models, const Dataset& target, const Dataset& source,
                         const EstimatorOptions& options) {
  return run_scheme(Scheme::Ensemble, models, target, source, options);
}

double ProbitOracleParams::rho1() const {
  return beta_t.dot(beta_s) / (std::sqrt(beta_t.squaredNorm() + sigma2) * beta_s.norm());
}

double ProbitOracleParams::rho2() const {
  return beta_t.dot(beta_s) / (beta_t.norm() * std::sqrt(beta_s.squaredNorm() + sigma2));
}

double ProbitOracleParams::theta_beta() const {
  return std::acos(std::clamp(beta_t.dot(beta_s) / (beta_t.norm() * beta_s.norm()), -1.0, 1.0));
}

double oracle_probit(const ProbitOracleParams& params) {
  require(params.beta_t.size() == params.beta_s.size(), "oracle_probit: beta lengths differ");
  require(params.beta_t.norm() > 0 && params.beta_s.norm() > 0, "oracle_probit: beta vectors must be nonzero");
  require(params.sigma2 >= 0, "oracle_probit: sigma^2 must be nonnegative");
  const double r1 = std::clamp(params.rho1(), -1.0, 1.0);
  const double r2 = std::clamp(params.rho2(), -1.0, 1.0);
  return (std::acos(r1) + std::acos(r2)) / (2.0 * std::numbers::pi);
}

double oracle_probit_smallnoise(double theta_beta) {
  require(theta_beta >= 0.0 && theta_beta <= std::numbers::pi, "oracle_probit_smallnoise: angle outside [0, pi]");
  return theta_beta / std::numbers::pi;
}

double LdaOracleParams::cos_theta() const {
  return std::clamp(mu_t.dot(mu_s) / (mu_t.norm() * mu_s.norm()), -1.0, 1.0);
}

double oracle_lda(const LdaOracleParams& params) {
  require(params.mu_t.size() == params.mu_s.size(), "oracle_lda: mean lengths differ");
  require(params.mu_t.norm() > 0 && params.mu_s.norm() > 0, "oracle_lda: mean vectors must be nonzero");
  const double c = params.cos_theta();
  return 0.5 * (normal_cdf(-params.mu_s.norm() * c) + normal_cdf(-params.mu_t.norm() * c));
}

double oracle_linear_regression(const Eigen::VectorXd& beta_t, const Eigen::VectorXd& beta_s, double sigma2) {
  require(beta_t.size() == beta_s.size(), "oracle_linear_regression: beta lengths differ");
  require(sigma2 >= 0, "oracle_linear_regression: sigma^2 must be nonnegative");
  return (beta_t - beta_s).squaredNorm() + sigma2;
}

std::optional<double> oracle_closed_form(const GeneratorSpec& target, const GeneratorSpec& source) {
  require(target.setting == source.setting, "oracle: target and source settings differ");
  switch (target.setting) {
    case SettingId::Probit:
      return oracle_probit({target.coef, source.coef, target.noise_sd * target.noise_sd});
    case SettingId::Lda:
      return oracle_lda({target.coef, source.coef});
    case SettingId::LinearRegression:
      return oracle_linear_regression(target.coef, source.coef, target.noise_sd * target.noise_sd);
    default:
      return std::nullopt;
  }
}

ClsEstimate oracle_monte_carlo(const OracleModel& target_oracle, const OracleModel& source_oracle,
                               std::size_t samples, std::uint64_t seed) {
  const GeneratorSpec& ts = target_oracle.spec();
  const GeneratorSpec& ss = source_oracle.spec();
  require(ts.setting == ss.setting && ts.p == ss.p, "oracle_monte_carlo: incompatible oracles");
  require(samples >= 2, "oracle_monte_carlo: need at least two samples");
  if (samples % 2 == 1) ++samples;
  const LossKind loss = default_loss(ts.task());

  auto directional = [&](const OracleModel& rule, const GeneratorSpec& draw_from, std::uint64_t stream) {
    const Dataset data = sample_dataset(draw_from, samples, derive_seed(seed, stream));
    const Eigen::VectorXd pred = rule.predict(data.features());
    Eigen::VectorXd losses(pred.size());
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      const double d = pred[i] - data.labels()[i];
      losses[i] = loss == LossKind::ZeroOne ? (d != 0.0 ? 1.0 : 0.0) : d * d;
    }
    const double m = losses.mean();
    const double sd = sample_sd(as_span(losses));
    return std::pair{m, sd / std::sqrt(static_cast<double>(losses.size()))};
  };

  ClsEstimate est;
  est.scheme = Scheme::MonteCarloOracle;
  est.seed = seed;
  std::tie(est.e_t, est.e_t_se) = directional(target_oracle, ss, 1);
  std::tie(est.e_s, est.e_s_se) = directional(source_oracle, ts, 2);
  est.score = 0.5 * (est.e_t + est.e_s);
  est.mc_se = 0.5 * std::hypot(est.e_t_se, est.e_s_se);
  return est;
}

std::string to_json(const ClsEstimate& est) {
  nlohmann::json j{{"score", est.score},   {"e_t", est.e_t},
                   {"e_s", est.e_s},       {"scheme", std::string(scheme_name(est.scheme))},
                   {"w", est.w},           {"models", est.models},
                   {"model_weights", est.model_weights}, {"model_scores", est.model_scores},
                   {"excluded", est.excluded}, {"folds", est.folds},
                   {"seed", est.seed}};
  auto weights = [](const std::optional<EnsembleWeights>& w) {
    if (!w) return nlohmann::json(nullptr);
    return nlohmann::json{{"lambda", w->lambda}, {"cv_errors", w->cv_errors}, {"weights", w->weights}};
  };
  j["target_weights"] = weights(est.target_weights);
  j["source_weights"] = weights(est.source_weights);
  if (est.scheme == Scheme::MonteCarloOracle) {
    j["mc_se"] = est.mc_se;
    j["e_t_se"] = est.e_t_se;
    j["e_s_se"] = est.e_s_se;
  }
  return j.dump(2);
}

}  // namespace cls
