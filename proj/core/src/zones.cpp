#include "cls/zones.hpp"

#include <algorithm>
#include <cmath>

#include "cls/error.hpp"
#include "cls/numeric.hpp"

namespace cls {

std::string_view zone_label(Zone zone) {
  switch (zone) {
    case Zone::PositiveTransfer: return "PT";
    case Zone::Ambiguous: return "AZ";
    case Zone::NegativeTransfer: return "NT";
  }
  return "??";
}

BaselineError baseline_from_fit(const DomainFit& fit, Scheme scheme, const Dataset& target,
                                const EstimatorOptions& options) {
  require(fit.folds.has_value(), "baseline: target fit was computed without cross-validation");
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < fit.models.size(); ++i) {
    if (fit.ok(i) && std::isfinite(fit.cv_errors[i])) usable.push_back(i);
  }
  if (usable.empty()) fail(ErrorKind::Numeric, "baseline: every model failed");
  if (scheme == Scheme::Single) usable.resize(1);

  std::vector<double> weights(usable.size(), 1.0 / static_cast<double>(usable.size()));
  if (scheme == Scheme::WeightedAvg || scheme == Scheme::Ensemble) {
    std::vector<double> errors;
    for (auto i : usable) errors.push_back(fit.cv_errors[i]);
    weights = softmax_weights(errors, options.lambda).weights;
  }

  const FoldPlan& plan = *fit.folds;
  BaselineError out;
  for (int f = 0; f < plan.k; ++f) {
    // A fold counts only if every member produced held-out predictions for it.
    bool complete = true;
    for (auto i : usable) {
      const auto& skipped = fit.cv[i].skipped_folds;
      if (std::find(skipped.begin(), skipped.end(), f) != skipped.end()) complete = false;
    }
    const auto rows = plan.test_indices(f);
    if (!complete || rows.empty()) continue;
    const Dataset held = target.subset(rows);
    double loss = 0.0;
    if (scheme == Scheme::Ensemble) {
      Eigen::VectorXd blended(static_cast<Eigen::Index>(rows.size()));
      const bool classify = target.task().is_classification();
      for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<double> votes(classify ? static_cast<std::size_t>(target.task().num_classes()) : 1, 0.0);
        for (std::size_t m = 0; m < usable.size(); ++m) {
          const double pred = fit.cv[usable[m]].oof_predictions[static_cast<Eigen::Index>(rows[r])];
          if (classify) {
            votes[static_cast<std::size_t>(pred)] += weights[m];
          } else {
            votes[0] += weights[m] * pred;
          }
        }
        blended[static_cast<Eigen::Index>(r)] =
            classify ? static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin()) : votes[0];
      }
      loss = mean_loss(blended, held.labels(), options.loss);
    } else {
      for (std::size_t m = 0; m < usable.size(); ++m) {
        Eigen::VectorXd pred(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          pred[static_cast<Eigen::Index>(r)] = fit.cv[usable[m]].oof_predictions[static_cast<Eigen::Index>(rows[r])];
        }
        loss += weights[m] * mean_loss(pred, held.labels(), options.loss);
      }
    }
    out.fold_losses.push_back(loss);
  }
  if (out.fold_losses.empty()) fail(ErrorKind::Numeric, "baseline: no usable folds");
  out.e0 = mean(out.fold_losses);
  out.se = sample_sd(out.fold_losses) / std::sqrt(static_cast<double>(out.fold_losses.size()));
  return out;
}

BaselineError baseline_error(const std::vector<ModelSpec>& models, Scheme scheme, const Dataset& target,
                             const EstimatorOptions& options) {
  require(options.folds >= 2, "baseline: need at least two folds");
  require(!models.empty(), "baseline: at least one model is required");
  std::vector<ModelSpec> specs;
  for (const auto& m : models) specs.push_back(resolve_for_task(m, target.task()));
  if (scheme == Scheme::Single) specs.resize(1);
  const DomainFit fit = fit_domain(specs, target, options, true);
  return baseline_from_fit(fit, scheme, target, options);
}

ZoneThresholds thresholds(double e0, double se, double gamma1, double gamma2) {
  require(std::isfinite(e0) && std::isfinite(se), "thresholds: e0 and se must be finite");
  require(se >= 0, "thresholds: se must be nonnegative");
  require(gamma1 < gamma2, "thresholds: gamma1 must be smaller than gamma2");
  return ZoneThresholds{e0, se, gamma1, gamma2, e0 + gamma1 * se, e0 + gamma2 * se};
}

Zone classify(double cls_score, const ZoneThresholds& t) {
  require(std::isfinite(cls_score), "classify: score must be finite");
  if (cls_score < t.tau1) return Zone::PositiveTransfer;
  if (cls_score > t.tau2) return Zone::NegativeTransfer;
  return Zone::Ambiguous;
}

double relative_error_reduction(double e0, double e_transfer) {
  require(e0 > 0, "relative_error_reduction: e0 must be positive");
  return (e0 - e_transfer) / e0;
}

}  // namespace cls
