#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cls/dataset.hpp"
#include "cls/estimators.hpp"
#include "cls/models.hpp"

namespace cls {

enum class Zone { PositiveTransfer, Ambiguous, NegativeTransfer };

/// "PT", "AZ" or "NT".
std::string_view zone_label(Zone zone);

struct ZoneThresholds {
  double e0 = 0.0;
  double se_e0 = 0.0;
  double gamma1 = 1.0;
  double gamma2 = 5.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
};

struct BaselineError {
  double e0 = 0.0;
  double se = 0.0;
  std::vector<double> fold_losses;
};

/// k-fold CV error of the target-only learner under the same scheme as the
/// CLS it is compared with. Per fold, Ensemble blends the members' held-out
/// predictions with the target softmax weights; the averaging schemes combine
/// member fold losses with uniform (avg) or softmax (wavg) weights.
BaselineError baseline_error(const std::vector<ModelSpec>& models, Scheme scheme, const Dataset& target,
                             const EstimatorOptions& options);
/// Same, reusing a target DomainFit computed with CV.
BaselineError baseline_from_fit(const DomainFit& fit, Scheme scheme, const Dataset& target,
                                const EstimatorOptions& options);

ZoneThresholds thresholds(double e0, double se, double gamma1 = 1.0, double gamma2 = 5.0);

/// score < tau1 -> PT, score > tau2 -> NT, boundaries inclusive in AZ.
Zone classify(double cls_score, const ZoneThresholds& thresholds);

/// (e0 - e_transfer) / e0.
double relative_error_reduction(double e0, double e_transfer);

}  // namespace cls
