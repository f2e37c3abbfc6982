#pragma once

#include <Eigen/Dense>

#include "cls/dataset.hpp"

namespace cls {

/// Sample mean and covariance with a ridge of 1e-6 * trace / p (floored so
/// every eigenvalue is at least 1e-9).
struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

GaussianFit fit_gaussian(const Eigen::MatrixXd& x);

/// KL(N_a || N_b) in closed form.
double kl_gaussian(const GaussianFit& a, const GaussianFit& b);
double kl_gaussian(const Dataset& a, const Dataset& b);

/// Bures-Wasserstein-2 distance between Gaussians.
double w2_gaussian(const GaussianFit& a, const GaussianFit& b);
double w2_gaussian(const Dataset& a, const Dataset& b);

struct SinkhornOptions {
  /// Entropic regularization as a fraction of the median ground cost.
  double epsilon_scale = 0.1;
  int iterations = 500;
};

/// Label-aware dataset distance. Ground cost between (x, y) and (x', y') is
/// |x - x'|^2 + W2^2(N_y, N_y') with class-conditional Gaussian fits. The
/// returned value is the square root of the debiased Sinkhorn divergence
/// OT(a,b) - (OT(a,a) + OT(b,b)) / 2, with OT(a,b) symmetrized, so the
/// distance of a dataset to itself is 0. Regression tasks are rejected.
double otdd_gaussian(const Dataset& a, const Dataset& b, const SinkhornOptions& options = {});

/// Entropic OT value (dual objective) between uniform empirical measures
/// under the given cost matrix, with the entropy taken relative to the
/// product measure, so a constant cost c has value c.
double sinkhorn_cost(const Eigen::MatrixXd& cost, double epsilon, int iterations);

}  // namespace cls
