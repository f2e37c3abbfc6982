// Kernel SVM classification and epsilon-SVR trained with SMO using
// second-order working-set selection (Fan, Chen & Lin, 2005).
#include <algorithm>
#include <cmath>
#include <limits>

#include "cls/error.hpp"
#include "models_internal.hpp"
#include "svm.hpp"

namespace cls::detail {
namespace {

constexpr double kTau = 1e-12;

struct DualProblem {
  const Eigen::MatrixXd& kernel;  // n x n; variable t uses row t % n
  std::vector<double> y;          // +-1, length l
  std::vector<double> linear;     // p in 1/2 a'Qa + p'a
  std::vector<double> upper;      // C_t
};

struct DualSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  double max_violation = 0.0;
  TrainingSummary summary;
};

DualSolution solve_smo(const DualProblem& prob, double eps) {
  const auto l = prob.y.size();
  const auto n = static_cast<std::size_t>(prob.kernel.rows());
  auto q = [&](std::size_t a, std::size_t b) {
    return prob.y[a] * prob.y[b] * prob.kernel(static_cast<Eigen::Index>(a % n), static_cast<Eigen::Index>(b % n));
  };
  std::vector<double> alpha(l, 0.0);
  std::vector<double> grad(prob.linear);
  std::vector<double> qd(l);
  for (std::size_t t = 0; t < l; ++t) qd[t] = q(t, t);
  auto is_upper = [&](std::size_t t) { return alpha[t] >= prob.upper[t]; };
  auto is_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto objective = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < l; ++t) f += alpha[t] * (grad[t] + prob.linear[t]);
    return 0.5 * f;
  };

  DualSolution sol;
  sol.summary.converged = false;
  sol.summary.objective_trace.push_back(0.0);
  const std::size_t max_iter = std::max<std::size_t>(10 * l * l, 1000);
  std::size_t iter = 0;
  std::vector<double> qi(l), qj(l);
  double violation = std::numeric_limits<double>::infinity();
  for (; iter < max_iter; ++iter) {
    // Select i: maximal violating index from I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = l;
    for (std::size_t t = 0; t < l; ++t) {
      if (prob.y[t] > 0) {
        if (!is_upper(t) && -grad[t] >= gmax) gmax = -grad[t], i = t;
      } else {
        if (!is_lower(t) && grad[t] >= gmax) gmax = grad[t], i = t;
      }
    }
    // Select j from I_low minimizing the second-order objective change.
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = l;
    double best = std::numeric_limits<double>::infinity();
    if (i < l) {
      for (std::size_t t = 0; t < l; ++t) qi[t] = q(i, t);
    }
    for (std::size_t t = 0; t < l; ++t) {
      if (prob.y[t] > 0) {
        if (!is_lower(t)) {
          const double diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (i < l && diff > 0) {
            const double quad = std::max(qd[i] + qd[t] - 2.0 * prob.y[i] * qi[t], kTau);
            const double gain = -diff * diff / quad;
            if (gain <= best) best = gain, j = t;
          }
        }
      } else {
        if (!is_upper(t)) {
          const double diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
          if (i < l && diff > 0) {
            const double quad = std::max(qd[i] + qd[t] + 2.0 * prob.y[i] * qi[t], kTau);
            const double gain = -diff * diff / quad;
            if (gain <= best) best = gain, j = t;
          }
        }
      }
    }
    violation = gmax + gmax2;
    if (violation < eps || i == l || j == l) {
      sol.summary.converged = true;
      break;
    }
    for (std::size_t t = 0; t < l; ++t) qj[t] = q(j, t);

    const double ci = prob.upper[i];
    const double cj = prob.upper[j];
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (prob.y[i] != prob.y[j]) {
      const double quad = std::max(qd[i] + qd[j] + 2.0 * qi[j], kTau);
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) alpha[i] = ci, alpha[j] = ci - diff;
      } else {
        if (alpha[j] > cj) alpha[j] = cj, alpha[i] = cj + diff;
      }
    } else {
      const double quad = std::max(qd[i] + qd[j] - 2.0 * qi[j], kTau);
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) alpha[i] = ci, alpha[j] = sum - ci;
      } else {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) alpha[j] = cj, alpha[i] = sum - cj;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < l; ++t) grad[t] += qi[t] * di + qj[t] * dj;
    if ((iter + 1) % l == 0) sol.summary.objective_trace.push_back(objective());
  }
  sol.summary.iterations = static_cast<int>(iter);
  sol.summary.final_objective = objective();
  sol.summary.objective_trace.push_back(sol.summary.final_objective);

  // Offset from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = prob.y[t] * grad[t];
    if (is_upper(t)) {
      if (prob.y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (prob.y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  if (free_count > 0) {
    sol.rho = free_sum / free_count;
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    sol.rho = 0.5 * (ub + lb);
  } else {
    sol.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  sol.alpha = std::move(alpha);
  sol.max_violation = violation;
  return sol;
}

double default_gamma(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const double var = (x.rowwise() - mu).array().square().colwise().mean().mean();
  return var > 0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose()).colwise() + na;
  d2.rowwise() += nb.transpose();
  return (-gamma * d2.array().max(0.0)).exp();
}

std::vector<double> upper_bounds(const Eigen::VectorXd& w, double c, std::size_t copies) {
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(w.size()) * copies);
  for (std::size_t r = 0; r < copies; ++r) {
    for (Eigen::Index i = 0; i < w.size(); ++i) upper.push_back(c * w[i]);
  }
  return upper;
}

}  // namespace

Eigen::VectorXd KernelMachine::decision(const Eigen::MatrixXd& x) const {
  if (!rbf_) return (x * linear_weights_).array() - rho_;
  if (support_.rows() == 0) return Eigen::VectorXd::Constant(x.rows(), -rho_);
  return (rbf_kernel(x, support_, gamma_) * support_coef_).array() - rho_;
}

Eigen::VectorXd KernelMachine::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd d = decision(x);
  if (!classify_) return d;
  return (d.array() > 0.0).cast<double>();
}

FitResult fit_kernel_machine(const TrainingData& data, const Hyperparameters& hp, bool rbf, bool classify) {
  const auto n = static_cast<std::size_t>(data.x.rows());
  const double gamma = hp.gamma.value_or(default_gamma(data.x));
  const Eigen::MatrixXd kernel = rbf ? rbf_kernel(data.x, data.x, gamma) : Eigen::MatrixXd(data.x * data.x.transpose());

  DualProblem prob{kernel, {}, {}, {}};
  if (classify) {
    for (std::size_t i = 0; i < n; ++i) prob.y.push_back(data.y[static_cast<Eigen::Index>(i)] > 0.5 ? 1.0 : -1.0);
    prob.linear.assign(n, -1.0);
    prob.upper = upper_bounds(data.w, hp.c, 1);
  } else {
    // Variables (alpha, alpha*): p = (eps - y, eps + y), signs (+1, -1).
    for (std::size_t i = 0; i < n; ++i) {
      prob.y.push_back(1.0);
      prob.linear.push_back(hp.epsilon - data.y[static_cast<Eigen::Index>(i)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      prob.y.push_back(-1.0);
      prob.linear.push_back(hp.epsilon + data.y[static_cast<Eigen::Index>(i)]);
    }
    prob.upper = upper_bounds(data.w, hp.c, 2);
  }
  DualSolution sol = solve_smo(prob, hp.smo_tol);

  Eigen::VectorXd coef(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    coef[static_cast<Eigen::Index>(i)] = classify ? prob.y[i] * sol.alpha[i] : sol.alpha[i] - sol.alpha[i + n];
  }
  SvmDualInfo info{sol.alpha, prob.y, prob.upper, sol.max_violation};
  auto machine = std::make_shared<KernelMachine>(rbf, classify, gamma, sol.rho, std::move(info));
  if (rbf) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < coef.size(); ++i) {
      if (coef[i] != 0.0) keep.push_back(i);
    }
    Eigen::MatrixXd support(static_cast<Eigen::Index>(keep.size()), data.x.cols());
    Eigen::VectorXd kept(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
      support.row(static_cast<Eigen::Index>(r)) = data.x.row(keep[r]);
      kept[static_cast<Eigen::Index>(r)] = coef[keep[r]];
    }
    machine->set_support(std::move(support), std::move(kept));
  } else {
    machine->set_linear(data.x.transpose() * coef);
  }
  return {machine, sol.summary};
}

FitResult fit_svc(const TrainingData& data, const Hyperparameters& hp, bool rbf) {
  if (data.classes == 2) return fit_kernel_machine(data, hp, rbf, true);
  return fit_one_vs_rest(data, [&](const TrainingData& sub) { return fit_kernel_machine(sub, hp, rbf, true); });
}

FitResult fit_svr(const TrainingData& data, const Hyperparameters& hp, bool rbf) {
  return fit_kernel_machine(data, hp, rbf, false);
}

}  // namespace cls::detail
