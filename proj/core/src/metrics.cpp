#include "cls/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cls/error.hpp"
#include "cls/numeric.hpp"

namespace cls {
namespace {

void check_dims(const Dataset& a, const Dataset& b, const char* what) {
  require(a.cols() == b.cols(), std::string(what) + ": datasets have " + std::to_string(a.cols()) + " and " +
                                    std::to_string(b.cols()) + " features");
  require(!a.is_empty() && !b.is_empty(), std::string(what) + ": datasets must be non-empty");
}

bool same_fit(const GaussianFit& a, const GaussianFit& b) {
  return a.mean.size() == b.mean.size() && a.mean == b.mean && a.covariance == b.covariance;
}

double bures_squared(const GaussianFit& a, const GaussianFit& b) {
  if (same_fit(a, b)) return 0.0;
  const Eigen::MatrixXd ra = sym_sqrt(a.covariance);
  const Eigen::MatrixXd cross = sym_sqrt(ra * b.covariance * ra);
  const double trace = a.covariance.trace() + b.covariance.trace() - 2.0 * cross.trace();
  return std::max(0.0, (a.mean - b.mean).squaredNorm() + trace);
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

double sinkhorn_log(const Eigen::MatrixXd& cost, double eps, int iterations) {
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      f[i] = -eps * log_sum_exp((g.array() - cost.row(i).transpose().array()) / eps + log_b);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      g[j] = -eps * log_sum_exp((f.array() - cost.col(j).array()) / eps + log_a);
    }
  }
  return f.mean() + g.mean();
}

}  // namespace

GaussianFit fit_gaussian(const Eigen::MatrixXd& x) {
  require(x.rows() >= 1 && x.cols() >= 1, "fit_gaussian: empty sample");
  const auto p = static_cast<double>(x.cols());
  GaussianFit fit;
  fit.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - fit.mean.transpose();
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  fit.covariance = centered.transpose() * centered / denom;
  const double ridge = std::max(1e-6 * fit.covariance.trace() / p, 1e-9);
  fit.covariance.diagonal().array() += ridge;
  return fit;
}

double kl_gaussian(const GaussianFit& a, const GaussianFit& b) {
  require(a.mean.size() == b.mean.size(), "kl_gaussian: dimension mismatch");
  if (same_fit(a, b)) return 0.0;
  const Eigen::LLT<Eigen::MatrixXd> lb(b.covariance);
  const Eigen::LLT<Eigen::MatrixXd> la(a.covariance);
  if (lb.info() != Eigen::Success || la.info() != Eigen::Success) {
    fail(ErrorKind::Numeric, "kl_gaussian: covariance not positive definite");
  }
  const auto p = static_cast<double>(a.mean.size());
  const double trace = lb.solve(a.covariance).trace();
  const Eigen::VectorXd diff = b.mean - a.mean;
  const double quad = diff.dot(lb.solve(diff));
  const double logdet_b = 2.0 * lb.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_a = 2.0 * la.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return std::max(0.0, 0.5 * (trace + quad - p + logdet_b - logdet_a));
}

double kl_gaussian(const Dataset& a, const Dataset& b) {
  check_dims(a, b, "kl_gaussian");
  return kl_gaussian(fit_gaussian(a.features()), fit_gaussian(b.features()));
}

double w2_gaussian(const GaussianFit& a, const GaussianFit& b) {
  require(a.mean.size() == b.mean.size(), "w2_gaussian: dimension mismatch");
  return std::sqrt(bures_squared(a, b));
}

double w2_gaussian(const Dataset& a, const Dataset& b) {
  check_dims(a, b, "w2_gaussian");
  return w2_gaussian(fit_gaussian(a.features()), fit_gaussian(b.features()));
}

double sinkhorn_cost(const Eigen::MatrixXd& cost, double eps, int iterations) {
  require(cost.rows() >= 1 && cost.cols() >= 1, "sinkhorn: empty cost matrix");
  require(eps > 0 && iterations >= 1, "sinkhorn: epsilon and iterations must be positive");
  // The scaling form is much cheaper; it is exact as long as exp(-C/eps)
  // stays well inside the double range.
  if (cost.maxCoeff() / eps > 500.0) return sinkhorn_log(cost, eps, iterations);
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  const Eigen::MatrixXd kernel = (-cost / eps).array().exp();
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
  for (int it = 0; it < iterations; ++it) {
    u = a.cwiseQuotient(kernel * v);
    v = b.cwiseQuotient(kernel.transpose() * u);
  }
  if (!u.allFinite() || !v.allFinite() || u.minCoeff() <= 0 || v.minCoeff() <= 0) {
    return sinkhorn_log(cost, eps, iterations);
  }
  // Potentials f = eps log(u / a), g = eps log(v / b) match the log-domain path.
  return eps * (a.dot((u.cwiseQuotient(a)).array().log().matrix()) + b.dot((v.cwiseQuotient(b)).array().log().matrix()));
}

double otdd_gaussian(const Dataset& a, const Dataset& b, const SinkhornOptions& options) {
  check_dims(a, b, "otdd_gaussian");
  if (!a.task().is_classification() || !b.task().is_classification()) {
    fail(ErrorKind::UnsupportedTask, "otdd_gaussian: label-aware distance is undefined for regression tasks");
  }
  require(a.task() == b.task(), "otdd_gaussian: datasets must share a label space");
  require(options.epsilon_scale > 0 && options.iterations >= 1, "otdd_gaussian: invalid Sinkhorn options");
  const int k = a.task().num_classes();

  auto class_fits = [&](const Dataset& d) {
    std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < d.rows(); ++i) rows[static_cast<std::size_t>(d.class_of(i))].push_back(static_cast<Eigen::Index>(i));
    std::vector<std::optional<GaussianFit>> fits(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      const auto& r = rows[static_cast<std::size_t>(c)];
      if (r.empty()) continue;
      Eigen::MatrixXd x(static_cast<Eigen::Index>(r.size()), d.cols());
      for (std::size_t t = 0; t < r.size(); ++t) x.row(static_cast<Eigen::Index>(t)) = d.features().row(r[t]);
      fits[static_cast<std::size_t>(c)] = fit_gaussian(x);
    }
    return fits;
  };
  const auto fa = class_fits(a);
  const auto fb = class_fits(b);

  // Label-to-label W2^2 between every pair of (dataset, class) fits.
  auto label_costs = [&](const auto& left, const auto& right) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const auto& l = left[static_cast<std::size_t>(i)];
        const auto& r = right[static_cast<std::size_t>(j)];
        if (l && r) out(i, j) = bures_squared(*l, *r);
      }
    }
    return out;
  };
  auto ground_cost = [&](const Dataset& x, const Dataset& y, const Eigen::MatrixXd& labels) {
    const Eigen::VectorXd nx = x.features().rowwise().squaredNorm();
    const Eigen::VectorXd ny = y.features().rowwise().squaredNorm();
    Eigen::MatrixXd c = (-2.0 * x.features() * y.features().transpose()).colwise() + nx;
    c.rowwise() += ny.transpose();
    c = c.cwiseMax(0.0);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) += labels(x.class_of(static_cast<std::size_t>(i)), y.class_of(static_cast<std::size_t>(j)));
    }
    return c;
  };

  const Eigen::MatrixXd cab = ground_cost(a, b, label_costs(fa, fb));
  std::vector<double> flat(cab.data(), cab.data() + cab.size());
  const auto mid = flat.begin() + static_cast<std::ptrdiff_t>(flat.size() / 2);
  std::nth_element(flat.begin(), mid, flat.end());
  double median = *mid;
  if (flat.size() % 2 == 0) {
    const double below = *std::max_element(flat.begin(), mid);
    median = 0.5 * (median + below);
  }
  const double eps = options.epsilon_scale * std::max(median, 1e-12);

  const double ab = sinkhorn_cost(cab, eps, options.iterations);
  const double ba = sinkhorn_cost(cab.transpose(), eps, options.iterations);
  const double aa = sinkhorn_cost(ground_cost(a, a, label_costs(fa, fa)), eps, options.iterations);
  const double bb = sinkhorn_cost(ground_cost(b, b, label_costs(fb, fb)), eps, options.iterations);
  const double divergence = 0.5 * (ab + ba) - 0.5 * (aa + bb);
  return std::sqrt(std::max(0.0, divergence));
}

}  // namespace cls
