#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace cls {

/// Standard normal CDF via erfc; relative accuracy ~1e-15 over the double range.
double normal_cdf(double x);

/// (rho^|r-c|) autoregressive correlation matrix.
Eigen::MatrixXd ar_covariance(int p, double rho);

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

/// Symmetric PSD square root via eigen-decomposition, negative eigenvalues clamped to 0.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace cls
