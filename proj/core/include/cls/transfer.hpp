#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cls/dataset.hpp"
#include "cls/models.hpp"

namespace cls {

struct TransferOutcome {
  std::string method;
  double test_error = 0.0;
  /// Same learner trained on target_train alone, evaluated on target_test.
  double baseline_error = 0.0;
  bool beat_baseline = false;
};

/// Fit on target_train + source, compare against target_train alone.
TransferOutcome naive_pool_transfer(const ModelSpec& model, const Dataset& target_train, const Dataset& source,
                                    const Dataset& target_test, LossKind loss);

struct TrAdaBoostOptions {
  int rounds = 20;
  /// Realize instance weights by weighted resampling instead of weighted fits.
  bool resample = false;
  std::uint64_t seed = 0;
};

/// Per-round bookkeeping, exposed for inspection and tests. Rows are ordered
/// source first, then target_train.
struct TrAdaBoostTrace {
  std::vector<double> target_errors;
  std::vector<double> beta_t;
  double beta_source = 0.0;
  /// Multiplier applied to every instance weight after each round.
  std::vector<Eigen::VectorXd> multipliers;
  std::vector<Eigen::VectorXd> misclassified;
  /// Fraction of total weight on source rows, before round 1 and after each round.
  std::vector<double> source_mass;
  int rounds_used = 0;
  bool stopped_early = false;
};

/// TrAdaBoost (Dai et al., 2007) for binary tasks. The final hypothesis is the
/// weighted vote of the last ceil(T/2) learners.
TransferOutcome tradaboost(const ModelSpec& base, const Dataset& target_train, const Dataset& source,
                           const Dataset& target_test, const TrAdaBoostOptions& options,
                           TrAdaBoostTrace* trace = nullptr);

}  // namespace cls
