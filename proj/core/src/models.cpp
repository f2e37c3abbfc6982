#include "cls/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "cls/error.hpp"
#include "cls/numeric.hpp"
#include "discriminant.hpp"
#include "models_internal.hpp"
#include "svm.hpp"

namespace cls {
namespace {

struct AlgorithmInfo {
  Algorithm algorithm;
  std::string_view id;
};

constexpr AlgorithmInfo kAlgorithms[] = {
    {Algorithm::LogReg, "logreg"},      {Algorithm::MultinomLogReg, "multinom-logreg"},
    {Algorithm::Probit, "probit"},      {Algorithm::Lda, "lda"},
    {Algorithm::Qda, "qda"},            {Algorithm::SvmLinear, "svm-linear"},
    {Algorithm::SvmRbf, "svm-rbf"},     {Algorithm::SvrLinear, "svr-linear"},
    {Algorithm::SvrRbf, "svr-rbf"},     {Algorithm::Gbt, "gbt"},
    {Algorithm::Ols, "ols"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

class ConstantPredictor : public detail::Predictor {
 public:
  explicit ConstantPredictor(double value) : value_(value) {}
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    return Eigen::VectorXd::Constant(x.rows(), value_);
  }

 private:
  double value_;
};

// Maps dense internal class ids back to the caller's ids.
class Remapped : public detail::Predictor {
 public:
  Remapped(std::shared_ptr<const detail::Predictor> inner, std::vector<int> ids)
      : inner_(std::move(inner)), ids_(std::move(ids)) {}
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = inner_->predict(x);
    for (auto& v : out) v = ids_[static_cast<std::size_t>(v)];
    return out;
  }
  [[nodiscard]] const detail::Predictor& inner() const { return *inner_; }

 private:
  std::shared_ptr<const detail::Predictor> inner_;
  std::vector<int> ids_;
};

const detail::Predictor& unwrap(const detail::Predictor& p) {
  if (const auto* r = dynamic_cast<const Remapped*>(&p)) return r->inner();
  return p;
}

detail::FitResult dispatch(const ModelSpec& spec, const detail::TrainingData& data) {
  switch (spec.algorithm) {
    case Algorithm::LogReg:
      return data.classes == 2 ? detail::fit_logreg(data, spec.hp) : detail::fit_multinomial(data, spec.hp);
    case Algorithm::MultinomLogReg:
      return detail::fit_multinomial(data, spec.hp);
    case Algorithm::Probit:
      return detail::fit_probit(data, spec.hp);
    case Algorithm::Lda:
      return detail::fit_lda(data, spec.hp);
    case Algorithm::Qda:
      return detail::fit_qda(data, spec.hp);
    case Algorithm::SvmLinear:
      return detail::fit_svc(data, spec.hp, false);
    case Algorithm::SvmRbf:
      return detail::fit_svc(data, spec.hp, true);
    case Algorithm::SvrLinear:
      return detail::fit_svr(data, spec.hp, false);
    case Algorithm::SvrRbf:
      return detail::fit_svr(data, spec.hp, true);
    case Algorithm::Gbt:
      return detail::fit_gbt(data, spec.hp);
    case Algorithm::Ols:
      return detail::fit_ols(data, spec.hp);
  }
  fail(ErrorKind::InvalidArgument, "unknown algorithm");
}

}  // namespace

namespace detail {

Eigen::VectorXd argmax_rows(const Eigen::MatrixXd& scores) {
  Eigen::VectorXd out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[i] = static_cast<double>(best);
  }
  return out;
}

Eigen::VectorXd OneVsRest::predict(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd scores(x.rows(), static_cast<Eigen::Index>(members_.size()));
  for (std::size_t c = 0; c < members_.size(); ++c) scores.col(static_cast<Eigen::Index>(c)) = members_[c]->decision(x);
  return argmax_rows(scores);
}

FitResult fit_ols(const TrainingData& data, const Hyperparameters&) {
  const Eigen::VectorXd sw = data.w.array().sqrt();
  const Eigen::MatrixXd z = sw.asDiagonal() * with_intercept(data.x);
  const Eigen::VectorXd rhs = sw.cwiseProduct(data.y);
  Eigen::VectorXd coef = z.colPivHouseholderQr().solve(rhs);
  TrainingSummary summary;
  summary.final_objective = (z * coef - rhs).squaredNorm() / data.w.sum();
  summary.regularized = z.colPivHouseholderQr().rank() < z.cols();
  return {std::make_shared<LinearScorer>(std::move(coef), false), summary};
}

}  // namespace detail

std::string_view algorithm_id(Algorithm algorithm) {
  for (const auto& info : kAlgorithms) {
    if (info.algorithm == algorithm) return info.id;
  }
  return "unknown";
}

std::string ModelSpec::id() const { return std::string(algorithm_id(algorithm)); }

bool ModelSpec::supports(const TaskKind& task) const {
  switch (algorithm) {
    case Algorithm::LogReg:
    case Algorithm::Probit:
      return task.type() == TaskType::Binary;
    case Algorithm::MultinomLogReg:
    case Algorithm::Lda:
    case Algorithm::Qda:
    case Algorithm::SvmLinear:
    case Algorithm::SvmRbf:
      return task.is_classification();
    case Algorithm::SvrLinear:
    case Algorithm::SvrRbf:
    case Algorithm::Ols:
      return !task.is_classification();
    case Algorithm::Gbt:
      return true;
  }
  return false;
}

void ModelSpec::validate() const {
  require(hp.c > 0, "model " + id() + ": C must be positive");
  require(!hp.gamma || *hp.gamma > 0, "model " + id() + ": gamma must be positive");
  require(hp.epsilon >= 0, "model " + id() + ": epsilon must be nonnegative");
  require(hp.rounds >= 1 && hp.depth >= 1, "model " + id() + ": rounds and depth must be >= 1");
  require(hp.learning_rate > 0, "model " + id() + ": learning rate must be positive");
  require(hp.max_iter >= 1 && hp.tol > 0 && hp.smo_tol > 0, "model " + id() + ": iteration limits must be positive");
}

ModelSpec parse_model(std::string_view id) {
  const std::string key = trim(id);
  for (const auto& info : kAlgorithms) {
    if (info.id == key) return ModelSpec{info.algorithm, {}};
  }
  fail(ErrorKind::InvalidArgument, "unknown model id '" + key + "'");
}

std::vector<ModelSpec> parse_model_list(std::string_view ids) {
  std::vector<ModelSpec> out;
  std::size_t start = 0;
  while (start <= ids.size()) {
    const auto comma = ids.find(',', start);
    const auto piece = ids.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!trim(piece).empty()) out.push_back(parse_model(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  require(!out.empty(), "model list is empty");
  return out;
}

std::vector<ModelSpec> default_models(const TaskKind& task) {
  switch (task.type()) {
    case TaskType::Binary:
      return parse_model_list("logreg,svm-linear,svm-rbf,gbt");
    case TaskType::MultiClass:
      return parse_model_list("multinom-logreg,svm-linear,svm-rbf,gbt");
    case TaskType::Regression:
      return parse_model_list("ols,svr-linear,svr-rbf,gbt");
  }
  return {};
}

ModelSpec resolve_for_task(ModelSpec spec, const TaskKind& task) {
  const bool regression = !task.is_classification();
  switch (spec.algorithm) {
    case Algorithm::LogReg:
      if (task.type() == TaskType::MultiClass) spec.algorithm = Algorithm::MultinomLogReg;
      break;
    case Algorithm::MultinomLogReg:
      if (task.type() == TaskType::Binary) spec.algorithm = Algorithm::LogReg;
      break;
    case Algorithm::SvmLinear:
      if (regression) spec.algorithm = Algorithm::SvrLinear;
      break;
    case Algorithm::SvmRbf:
      if (regression) spec.algorithm = Algorithm::SvrRbf;
      break;
    case Algorithm::SvrLinear:
      if (!regression) spec.algorithm = Algorithm::SvmLinear;
      break;
    case Algorithm::SvrRbf:
      if (!regression) spec.algorithm = Algorithm::SvmRbf;
      break;
    default:
      break;
  }
  return spec;
}

std::string to_json(const ModelSpec& spec) {
  nlohmann::json hp{{"c", spec.hp.c},
                    {"epsilon", spec.hp.epsilon},
                    {"rounds", spec.hp.rounds},
                    {"depth", spec.hp.depth},
                    {"learning_rate", spec.hp.learning_rate},
                    {"max_iter", spec.hp.max_iter},
                    {"tol", spec.hp.tol},
                    {"smo_tol", spec.hp.smo_tol}};
  hp["gamma"] = spec.hp.gamma ? nlohmann::json(*spec.hp.gamma) : nlohmann::json(nullptr);
  return nlohmann::json{{"algorithm", spec.id()}, {"hyperparameters", hp}}.dump();
}

ModelSpec model_spec_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelSpec spec = parse_model(j.at("algorithm").get<std::string>());
    if (j.contains("hyperparameters")) {
      const auto& hp = j.at("hyperparameters");
      Hyperparameters d;
      spec.hp.c = hp.value("c", d.c);
      spec.hp.epsilon = hp.value("epsilon", d.epsilon);
      spec.hp.rounds = hp.value("rounds", d.rounds);
      spec.hp.depth = hp.value("depth", d.depth);
      spec.hp.learning_rate = hp.value("learning_rate", d.learning_rate);
      spec.hp.max_iter = hp.value("max_iter", d.max_iter);
      spec.hp.tol = hp.value("tol", d.tol);
      spec.hp.smo_tol = hp.value("smo_tol", d.smo_tol);
      if (hp.contains("gamma") && !hp.at("gamma").is_null()) spec.hp.gamma = hp.at("gamma").get<double>();
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("model spec JSON: ") + e.what());
  }
}

FittedModel::FittedModel(Algorithm algorithm, TaskKind task, int p, std::shared_ptr<const detail::Predictor> impl,
                         TrainingSummary summary)
    : algorithm_(algorithm), task_(task), p_(p), impl_(std::move(impl)), summary_(std::move(summary)) {}

FittedModel fit(const ModelSpec& spec, const Dataset& data, std::span<const double> weights) {
  spec.validate();
  const TaskKind& task = data.task();
  if (!spec.supports(task)) {
    fail(ErrorKind::UnsupportedTask, "model " + spec.id() + " does not support task " + task.name());
  }
  require(!data.is_empty(), "fit: dataset is empty");
  const Eigen::Index n = static_cast<Eigen::Index>(data.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!weights.empty()) {
    require(static_cast<Eigen::Index>(weights.size()) == n, "fit: weight count must equal row count");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = weights[static_cast<std::size_t>(i)];
      require(std::isfinite(v) && v >= 0, "fit: weights must be finite and nonnegative");
      w[i] = v;
    }
  }
  require(w.sum() > 0, "fit: weights sum to zero");

  // Zero-weight rows carry no information; drop them so class bookkeeping
  // only sees classes that actually contribute.
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w[i] > 0) rows.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(m, data.cols());
  Eigen::VectorXd y(m);
  Eigen::VectorXd wk(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    x.row(r) = data.features().row(rows[static_cast<std::size_t>(r)]);
    y[r] = data.labels()[rows[static_cast<std::size_t>(r)]];
    wk[r] = w[rows[static_cast<std::size_t>(r)]];
  }
  wk *= static_cast<double>(m) / wk.sum();

  if (!task.is_classification()) {
    auto [impl, summary] = dispatch(spec, detail::TrainingData{x, y, wk, 0});
    return {spec.algorithm, task, data.cols(), std::move(impl), std::move(summary)};
  }

  std::vector<int> present;
  std::map<int, int> dense;
  for (Eigen::Index r = 0; r < m; ++r) dense.emplace(static_cast<int>(y[r]), 0);
  for (auto& [label, id] : dense) {
    id = static_cast<int>(present.size());
    present.push_back(label);
  }
  if (present.size() == 1) {
    TrainingSummary summary;
    return {spec.algorithm, task, data.cols(), std::make_shared<ConstantPredictor>(present[0]), summary};
  }
  const bool identity = static_cast<int>(present.size()) == task.num_classes();
  if (!identity) {
    for (auto& v : y) v = dense.at(static_cast<int>(v));
  }
  auto [impl, summary] = dispatch(spec, detail::TrainingData{x, y, wk, static_cast<int>(present.size())});
  if (!identity) impl = std::make_shared<Remapped>(std::move(impl), present);
  return {spec.algorithm, task, data.cols(), std::move(impl), std::move(summary)};
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& x) {
  require(x.cols() == model.dimension(), "predict: expected " + std::to_string(model.dimension()) +
                                             " features, got " + std::to_string(x.cols()));
  Eigen::VectorXd out = model.impl().predict(x);
  if (!out.allFinite()) fail(ErrorKind::Numeric, "predict: non-finite prediction from " + std::string(algorithm_id(model.algorithm())));
  return out;
}

CvResult cv_error(const ModelSpec& spec, const Dataset& data, const FoldPlan& folds, LossKind loss) {
  check_loss(data.task(), loss);
  require(folds.assignments.size() == data.rows(), "cv_error: fold plan does not match dataset");
  std::vector<bool> in_data;
  if (data.task().is_classification()) {
    in_data.assign(static_cast<std::size_t>(data.task().num_classes()), false);
    for (std::size_t i = 0; i < data.rows(); ++i) in_data[static_cast<std::size_t>(data.class_of(i))] = true;
  }
  CvResult result;
  result.oof_predictions = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(data.rows()),
                                                     std::numeric_limits<double>::quiet_NaN());
  for (int f = 0; f < folds.k; ++f) {
    const auto train = folds.train_indices(f);
    const auto test = folds.test_indices(f);
    if (test.empty() || train.empty()) {
      result.skipped_folds.push_back(f);
      continue;
    }
    if (data.task().is_classification()) {
      std::vector<bool> seen(in_data.size(), false);
      for (auto i : train) seen[static_cast<std::size_t>(data.class_of(i))] = true;
      if (seen != in_data) {
        result.skipped_folds.push_back(f);
        continue;
      }
    }
    const Dataset train_set = data.subset(train);
    const Dataset test_set = data.subset(test);
    const FittedModel model = fit(spec, train_set);
    const Eigen::VectorXd pred = predict(model, test_set.features());
    result.fold_losses.push_back(mean_loss(pred, test_set.labels(), loss));
    for (std::size_t r = 0; r < test.size(); ++r) {
      result.oof_predictions[static_cast<Eigen::Index>(test[r])] = pred[static_cast<Eigen::Index>(r)];
    }
  }
  if (result.fold_losses.empty()) fail(ErrorKind::Numeric, "cv_error: every fold was skipped");
  result.mean = mean(result.fold_losses);
  result.se = sample_sd(result.fold_losses) / std::sqrt(static_cast<double>(result.fold_losses.size()));
  return result;
}

Eigen::VectorXd linear_coefficients(const FittedModel& model) {
  const auto& impl = unwrap(model.impl());
  if (const auto* lin = dynamic_cast<const detail::LinearScorer*>(&impl)) return lin->coefficients();
  if (const auto* km = dynamic_cast<const detail::KernelMachine*>(&impl); km != nullptr && km->is_linear()) {
    Eigen::VectorXd coef(km->linear_weights().size() + 1);
    coef[0] = -km->rho();
    coef.tail(km->linear_weights().size()) = km->linear_weights();
    return coef;
  }
  return {};
}

Eigen::MatrixXd class_means(const FittedModel& model) {
  if (const auto* d = dynamic_cast<const detail::Discriminant*>(&unwrap(model.impl()))) return d->means();
  return {};
}

std::vector<SvmDualInfo> svm_dual_info(const FittedModel& model) {
  const auto& impl = unwrap(model.impl());
  if (const auto* km = dynamic_cast<const detail::KernelMachine*>(&impl)) return {km->dual()};
  std::vector<SvmDualInfo> out;
  if (const auto* ovr = dynamic_cast<const detail::OneVsRest*>(&impl)) {
    for (const auto& member : ovr->members()) {
      if (const auto* km = dynamic_cast<const detail::KernelMachine*>(member.get())) out.push_back(km->dual());
    }
  }
  return out;
}

}  // namespace cls
