// Gaussian discriminant analysis with shared (LDA) or per-class (QDA) covariance.
#include <cmath>
#include <numbers>

#include "cls/error.hpp"
#include "discriminant.hpp"
#include "models_internal.hpp"

namespace cls::detail {
namespace {

constexpr double kRidge = 1e-6;

// Cholesky factor of cov; adds the 1e-6 ridge when cov is numerically singular.
Eigen::LLT<Eigen::MatrixXd> stable_cholesky(Eigen::MatrixXd cov, bool* regularized) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(top, 1.0)) {
    cov.diagonal().array() += kRidge;
    *regularized = true;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) fail(ErrorKind::Numeric, "discriminant analysis: covariance not positive definite");
  return llt;
}

}  // namespace

Eigen::VectorXd Discriminant::predict(const Eigen::MatrixXd& x) const {
  const Eigen::Index k = means_.rows();
  Eigen::MatrixXd scores(x.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const std::size_t f = factors_.size() == 1 ? 0 : static_cast<std::size_t>(c);
    Eigen::MatrixXd centered = (x.rowwise() - means_.row(c)).transpose();
    factors_[f].matrixL().solveInPlace(centered);
    const Eigen::VectorXd quad = centered.colwise().squaredNorm().transpose();
    scores.col(c) = (-0.5 * quad).array() + (log_priors_[c] - 0.5 * log_dets_[f]);
  }
  return argmax_rows(scores);
}

FitResult fit_discriminant(const TrainingData& data, bool shared) {
  const int k = data.classes;
  const Eigen::Index p = data.x.cols();
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, p);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(data.y[i]);
    means.row(c) += data.w[i] * data.x.row(i);
    mass[c] += data.w[i];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (mass[c] <= 0) fail(ErrorKind::InvalidArgument, "discriminant analysis: class " + std::to_string(c) + " has no weight");
    means.row(c) /= mass[c];
  }

  std::vector<Eigen::MatrixXd> covs(shared ? 1 : static_cast<std::size_t>(k), Eigen::MatrixXd::Zero(p, p));
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(data.y[i]);
    const Eigen::RowVectorXd r = data.x.row(i) - means.row(c);
    covs[shared ? 0 : static_cast<std::size_t>(c)] += data.w[i] * r.transpose() * r;
  }
  // Unbiased denominators in weight units: n - K pooled, n_k - 1 per class.
  const double total = mass.sum();
  if (shared) {
    covs[0] /= std::max(total - k, 1.0);
  } else {
    for (Eigen::Index c = 0; c < k; ++c) covs[static_cast<std::size_t>(c)] /= std::max(mass[c] - 1.0, 1.0);
  }

  TrainingSummary summary;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;
  std::vector<double> log_dets;
  for (auto& cov : covs) {
    factors.push_back(stable_cholesky(cov, &summary.regularized));
    log_dets.push_back(2.0 * factors.back().matrixL().toDenseMatrix().diagonal().array().log().sum());
  }
  Eigen::VectorXd log_priors = (mass / total).array().log();
  return {std::make_shared<Discriminant>(std::move(means), std::move(factors), std::move(log_dets),
                                         std::move(log_priors)),
          summary};
}

FitResult fit_lda(const TrainingData& data, const Hyperparameters&) { return fit_discriminant(data, true); }
FitResult fit_qda(const TrainingData& data, const Hyperparameters&) { return fit_discriminant(data, false); }

}  // namespace cls::detail
