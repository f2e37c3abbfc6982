#include "cls/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cls/error.hpp"
#include "cls/rng.hpp"

namespace cls {
namespace {

void check_transfer(const Dataset& target_train, const Dataset& source, const Dataset& target_test) {
  require(target_train.cols() == target_test.cols() && (source.is_empty() || source.cols() == target_train.cols()),
          "transfer: datasets must share the feature dimension");
  require(target_train.task() == target_test.task() && source.task() == target_train.task(),
          "transfer: datasets must share the task");
  require(!target_train.is_empty() && !target_test.is_empty(), "transfer: target splits must be non-empty");
}

double test_loss(const FittedModel& model, const Dataset& test, LossKind loss) {
  return mean_loss(predict(model, test.features()), test.labels(), loss);
}

// Weighted fit, or an unweighted fit on a weighted bootstrap of the same size.
FittedModel weighted_fit(const ModelSpec& spec, const Dataset& data, const Eigen::VectorXd& w, bool resample,
                         Rng& rng) {
  if (!resample) return fit(spec, data, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
  std::vector<double> cumulative(static_cast<std::size_t>(w.size()));
  std::partial_sum(w.data(), w.data() + w.size(), cumulative.begin());
  std::vector<std::size_t> rows(data.rows());
  for (auto& r : rows) {
    const double u = rng.uniform() * cumulative.back();
    r = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    r = std::min(r, data.rows() - 1);
  }
  return fit(spec, data.subset(rows));
}

}  // namespace

TransferOutcome naive_pool_transfer(const ModelSpec& model, const Dataset& target_train, const Dataset& source,
                                    const Dataset& target_test, LossKind loss) {
  check_transfer(target_train, source, target_test);
  check_loss(target_train.task(), loss);
  TransferOutcome out;
  out.method = "naive";
  out.baseline_error = test_loss(fit(model, target_train), target_test, loss);
  out.test_error = source.is_empty() ? out.baseline_error
                                     : test_loss(fit(model, concat(target_train, source)), target_test, loss);
  out.beat_baseline = out.test_error < out.baseline_error;
  return out;
}

TransferOutcome tradaboost(const ModelSpec& base, const Dataset& target_train, const Dataset& source,
                           const Dataset& target_test, const TrAdaBoostOptions& options, TrAdaBoostTrace* trace) {
  check_transfer(target_train, source, target_test);
  require(target_train.task().type() == TaskType::Binary, "tradaboost: only binary tasks are supported",
          ErrorKind::UnsupportedTask);
  require(options.rounds >= 2, "tradaboost: at least two rounds are required");

  TransferOutcome out;
  out.method = "tradaboost";
  const FittedModel baseline = fit(base, target_train);
  out.baseline_error = test_loss(baseline, target_test, LossKind::ZeroOne);
  if (source.is_empty()) {
    out.test_error = out.baseline_error;
    out.beat_baseline = false;
    return out;
  }

  const Dataset all = concat(source, target_train);
  const auto ns = static_cast<Eigen::Index>(source.rows());
  const auto n = static_cast<Eigen::Index>(all.rows());
  const double beta_source = 1.0 / (1.0 + std::sqrt(2.0 * std::log(static_cast<double>(ns)) / options.rounds));
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  Rng rng(options.seed, 0x7AB);
  TrAdaBoostTrace local;
  local.beta_source = beta_source;
  auto source_mass = [&] { return w.head(ns).sum() / w.sum(); };
  local.source_mass.push_back(source_mass());

  std::vector<FittedModel> learners;
  std::vector<double> log_inv_beta;
  for (int t = 0; t < options.rounds; ++t) {
    w /= w.sum();
    const FittedModel h = weighted_fit(base, all, w, options.resample, rng);
    const Eigen::VectorXd pred = predict(h, all.features());
    const Eigen::VectorXd miss = (pred - all.labels()).cwiseAbs();
    const double target_mass = w.tail(n - ns).sum();
    const double err = w.tail(n - ns).dot(miss.tail(n - ns)) / target_mass;
    local.target_errors.push_back(err);
    if (err >= 0.5) {
      local.stopped_early = true;
      if (learners.empty()) {
        learners.push_back(h);
        log_inv_beta.push_back(1.0);
      }
      break;
    }
    const double clipped = std::max(err, 1e-10);
    const double beta_t = clipped / (1.0 - clipped);
    local.beta_t.push_back(beta_t);
    Eigen::VectorXd mult(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mult[i] = i < ns ? std::pow(beta_source, miss[i]) : std::pow(beta_t, -miss[i]);
    }
    w = w.cwiseProduct(mult);
    local.multipliers.push_back(mult);
    local.misclassified.push_back(miss);
    local.source_mass.push_back(source_mass());
    learners.push_back(h);
    log_inv_beta.push_back(-std::log(beta_t));
  }
  local.rounds_used = static_cast<int>(learners.size());

  // Vote of the last ceil(T/2) learners: predict 1 when
  // sum_t log(1/beta_t) h_t(x) >= (1/2) sum_t log(1/beta_t).
  const std::size_t first = learners.size() / 2;
  Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target_test.rows()));
  double half = 0.0;
  for (std::size_t t = first; t < learners.size(); ++t) {
    score += log_inv_beta[t] * predict(learners[t], target_test.features());
    half += 0.5 * log_inv_beta[t];
  }
  const Eigen::VectorXd final_pred = (score.array() >= half).cast<double>();
  out.test_error = mean_loss(final_pred, target_test.labels(), LossKind::ZeroOne);
  out.beat_baseline = out.test_error < out.baseline_error;
  if (trace != nullptr) *trace = std::move(local);
  return out;
}

}  // namespace cls
