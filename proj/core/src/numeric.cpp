#include "cls/numeric.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace cls {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

Eigen::MatrixXd ar_covariance(int p, double rho) {
  Eigen::MatrixXd sigma(p, p);
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) sigma(r, c) = std::pow(rho, std::abs(r - c));
  }
  return sigma;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace cls
