// IRLS trainers: binary logistic, probit, and softmax (multinomial) regression.
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cls/error.hpp"
#include "cls/numeric.hpp"
#include "models_internal.hpp"

namespace cls::detail {
namespace {

constexpr double kHessianJitter = 1e-10;

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logistic_nll(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = z * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) total += w[i] * (softplus(eta[i]) - y[i] * eta[i]);
  return total / w.sum();
}

// log Phi(t), accurate in the far left tail through the erfc scaling.
double log_normal_cdf(double t) {
  if (t > -30.0) return std::log(normal_cdf(t));
  // Asymptotic expansion: Phi(t) ~ phi(t)/|t| * (1 - 1/t^2 + 3/t^4).
  const double t2 = t * t;
  return -0.5 * t2 - std::log(-t) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log1p(-1.0 / t2 + 3.0 / (t2 * t2));
}

// phi(t) / Phi(t) (inverse Mills ratio), stable for very negative t.
double mills(double t) {
  const double log_phi = -0.5 * t * t - 0.5 * std::log(2.0 * std::numbers::pi);
  return std::exp(log_phi - log_normal_cdf(t));
}

double probit_nll(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = z * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    total -= w[i] * (y[i] > 0.5 ? log_normal_cdf(eta[i]) : log_normal_cdf(-eta[i]));
  }
  return total / w.sum();
}

Eigen::VectorXd solve_newton(Eigen::MatrixXd hessian, const Eigen::VectorXd& gradient, bool* regularized) {
  const double scale = std::max(1.0, hessian.diagonal().cwiseAbs().maxCoeff());
  hessian.diagonal().array() += kHessianJitter * scale;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    *regularized = true;
    hessian.diagonal().array() += 1e-6 * scale;
    ldlt.compute(hessian);
  }
  return ldlt.solve(gradient);
}

// Damped Newton loop shared by the three GLMs. `evaluate` fills gradient and
// Hessian at beta and returns the objective.
template <typename Objective, typename Derivatives>
TrainingSummary newton(Eigen::VectorXd& beta, const Hyperparameters& hp, Objective&& objective,
                       Derivatives&& derivatives) {
  TrainingSummary summary;
  summary.converged = false;
  double current = objective(beta);
  summary.objective_trace.push_back(current);
  Eigen::VectorXd gradient(beta.size());
  Eigen::MatrixXd hessian(beta.size(), beta.size());
  for (int iter = 0; iter < hp.max_iter; ++iter) {
    derivatives(beta, gradient, hessian);
    if (gradient.lpNorm<Eigen::Infinity>() <= hp.tol) {
      summary.converged = true;
      break;
    }
    const Eigen::VectorXd step = solve_newton(hessian, gradient, &summary.regularized);
    double t = 1.0;
    Eigen::VectorXd candidate = beta - step;
    double next = objective(candidate);
    while (!(next <= current) && t > 1e-12) {
      t *= 0.5;
      candidate = beta - t * step;
      next = objective(candidate);
    }
    summary.iterations = iter + 1;
    if (!(next <= current)) break;  // no descent possible at machine precision
    const double decrease = current - next;
    beta = std::move(candidate);
    current = next;
    summary.objective_trace.push_back(current);
    if (decrease <= hp.tol * (std::abs(current) + hp.tol) && (t * step).lpNorm<Eigen::Infinity>() <= 1e-6) {
      summary.converged = true;
      break;
    }
    // Separable data: the optimum is at infinity, further steps only inflate beta.
    if (current < 1e-10) {
      summary.converged = true;
      break;
    }
  }
  summary.final_objective = current;
  return summary;
}

}  // namespace

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

FitResult fit_logreg(const TrainingData& data, const Hyperparameters& hp) {
  const Eigen::MatrixXd z = with_intercept(data.x);
  const double wsum = data.w.sum();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(z.cols());
  auto objective = [&](const Eigen::VectorXd& b) { return logistic_nll(z, data.y, data.w, b); };
  auto derivatives = [&](const Eigen::VectorXd& b, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    const Eigen::VectorXd eta = z * b;
    Eigen::VectorXd resid(eta.size());
    Eigen::VectorXd curv(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double prob = sigmoid(eta[i]);
      resid[i] = data.w[i] * (prob - data.y[i]);
      curv[i] = data.w[i] * prob * (1.0 - prob);
    }
    g = z.transpose() * resid / wsum;
    h = z.transpose() * curv.asDiagonal() * z / wsum;
  };
  TrainingSummary summary = newton(beta, hp, objective, derivatives);
  return {std::make_shared<LinearScorer>(beta, true), summary};
}

FitResult fit_probit(const TrainingData& data, const Hyperparameters& hp) {
  const Eigen::MatrixXd z = with_intercept(data.x);
  const double wsum = data.w.sum();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(z.cols());
  auto objective = [&](const Eigen::VectorXd& b) { return probit_nll(z, data.y, data.w, b); };
  // Fisher scoring: expected information phi^2 / (Phi (1 - Phi)).
  auto derivatives = [&](const Eigen::VectorXd& b, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    const Eigen::VectorXd eta = z * b;
    Eigen::VectorXd resid(eta.size());
    Eigen::VectorXd curv(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double up = mills(eta[i]);
      const double down = mills(-eta[i]);
      resid[i] = data.w[i] * (data.y[i] > 0.5 ? -up : down);
      curv[i] = data.w[i] * up * down;
    }
    g = z.transpose() * resid / wsum;
    h = z.transpose() * curv.asDiagonal() * z / wsum;
  };
  TrainingSummary summary = newton(beta, hp, objective, derivatives);
  return {std::make_shared<LinearScorer>(beta, true), summary};
}

namespace {

class SoftmaxModel : public Predictor {
 public:
  explicit SoftmaxModel(Eigen::MatrixXd coef) : coef_(std::move(coef)) {}
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(x.rows(), coef_.cols() + 1);
    scores.rightCols(coef_.cols()) = with_intercept(x) * coef_;
    return argmax_rows(scores);
  }

 private:
  // (p+1) x (K-1); class 0 is the reference with zero scores.
  Eigen::MatrixXd coef_;
};

Eigen::MatrixXd softmax_probs(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta, int classes) {
  const Eigen::Index d = z.cols();
  const Eigen::Map<const Eigen::MatrixXd> coef(beta.data(), d, classes - 1);
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(z.rows(), classes);
  scores.rightCols(classes - 1) = z * coef;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - top).exp();
    scores.row(i) /= scores.row(i).sum();
  }
  return scores;
}

}  // namespace

FitResult fit_multinomial(const TrainingData& data, const Hyperparameters& hp) {
  const int k = data.classes;
  const Eigen::MatrixXd z = with_intercept(data.x);
  const Eigen::Index d = z.cols();
  const double wsum = data.w.sum();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d * (k - 1));

  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::Map<const Eigen::MatrixXd> coef(b.data(), d, k - 1);
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(z.rows(), k);
    scores.rightCols(k - 1) = z * coef;
    double total = 0.0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      const double top = scores.row(i).maxCoeff();
      const double lse = top + std::log((scores.row(i).array() - top).exp().sum());
      total += data.w[i] * (lse - scores(i, static_cast<Eigen::Index>(data.y[i])));
    }
    return total / wsum;
  };
  auto derivatives = [&](const Eigen::VectorXd& b, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    const Eigen::MatrixXd prob = softmax_probs(z, b, k);
    g.setZero();
    h.setZero();
    for (int a = 1; a < k; ++a) {
      Eigen::VectorXd resid(z.rows());
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        resid[i] = data.w[i] * (prob(i, a) - (static_cast<int>(data.y[i]) == a ? 1.0 : 0.0));
      }
      g.segment((a - 1) * d, d) = z.transpose() * resid / wsum;
      for (int c = a; c < k; ++c) {
        Eigen::VectorXd curv(z.rows());
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
          curv[i] = data.w[i] * prob(i, a) * ((a == c ? 1.0 : 0.0) - prob(i, c));
        }
        const Eigen::MatrixXd block = z.transpose() * curv.asDiagonal() * z / wsum;
        h.block((a - 1) * d, (c - 1) * d, d, d) = block;
        if (c != a) h.block((c - 1) * d, (a - 1) * d, d, d) = block.transpose();
      }
    }
  };
  TrainingSummary summary = newton(beta, hp, objective, derivatives);
  Eigen::MatrixXd coef = Eigen::Map<const Eigen::MatrixXd>(beta.data(), d, k - 1);
  return {std::make_shared<SoftmaxModel>(std::move(coef)), summary};
}

}  // namespace cls::detail

namespace cls {

double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef,
                          Eigen::VectorXd* gradient) {
  require(x.rows() == y.size(), "logistic_objective: row/label mismatch");
  require(coef.size() == x.cols() + 1, "logistic_objective: coefficient length must be p + 1");
  const Eigen::MatrixXd z = detail::with_intercept(x);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(y.size());
  if (gradient != nullptr) {
    const Eigen::VectorXd eta = z * coef;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = detail::sigmoid(eta[i]) - y[i];
    *gradient = z.transpose() * resid / static_cast<double>(y.size());
  }
  return detail::logistic_nll(z, y, w, coef);
}

}  // namespace cls
