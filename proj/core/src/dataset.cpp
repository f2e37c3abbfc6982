#include "cls/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "cls/error.hpp"
#include "cls/rng.hpp"

namespace cls {

TaskKind TaskKind::multiclass(int classes) {
  require(classes >= 3, "multiclass task needs K >= 3, got " + std::to_string(classes));
  return TaskKind(TaskType::MultiClass, classes);
}

std::string TaskKind::name() const {
  switch (type_) {
    case TaskType::Binary:
      return "binary";
    case TaskType::MultiClass:
      return "multiclass:" + std::to_string(classes_);
    case TaskType::Regression:
      return "regression";
  }
  return "unknown";
}

TaskKind parse_task(std::string_view text) {
  if (text == "binary") return TaskKind::binary();
  if (text == "regression") return TaskKind::regression();
  if (text.starts_with("multiclass:")) {
    int k = 0;
    auto digits = text.substr(11);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return TaskKind::multiclass(k);
  }
  fail(ErrorKind::InvalidArgument,
       "unknown task '" + std::string(text) + "' (expected binary, multiclass:K or regression)");
}

LossKind default_loss(const TaskKind& task) {
  return task.is_classification() ? LossKind::ZeroOne : LossKind::SquaredError;
}

void check_loss(const TaskKind& task, LossKind loss) {
  if (task.is_classification() && loss != LossKind::ZeroOne)
    fail(ErrorKind::InvalidArgument, "squared-error loss requires a regression task");
  if (!task.is_classification() && loss != LossKind::SquaredError)
    fail(ErrorKind::InvalidArgument, "0-1 loss requires a classification task");
}

std::string_view loss_name(LossKind loss) {
  return loss == LossKind::ZeroOne ? "zero_one" : "squared_error";
}

Dataset::Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels, TaskKind task,
                 std::vector<std::string> column_names)
    : Dataset(std::move(features), std::move(labels), task, std::move(column_names), false) {}

Dataset::Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels, TaskKind task,
                 std::vector<std::string> column_names, bool allow_empty)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      task_(task),
      column_names_(std::move(column_names)) {
  require(allow_empty || features_.rows() >= 1, "dataset needs at least one row");
  require(features_.cols() >= 1, "dataset needs at least one feature column");
  require(labels_.size() == features_.rows(), "label count does not match feature rows");
  require(column_names_.empty() || column_names_.size() == static_cast<std::size_t>(features_.cols()),
          "column name count does not match feature columns");
  require(features_.allFinite(), "feature matrix contains non-finite values");
  require(labels_.allFinite(), "labels contain non-finite values");
  if (task_.is_classification()) {
    const int k = task_.num_classes();
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
      const double y = labels_[i];
      if (y != std::floor(y) || y < 0 || y >= k) {
        fail(ErrorKind::InvalidArgument, "class label " + std::to_string(y) + " at row " +
                                             std::to_string(i) + " outside {0,...," +
                                             std::to_string(k - 1) + "}");
      }
    }
  }
}

Dataset Dataset::empty(int p, TaskKind task) {
  return Dataset(Eigen::MatrixXd(0, p), Eigen::VectorXd(0), task, {}, true);
}

std::vector<std::size_t> Dataset::class_counts() const {
  if (!task_.is_classification()) return {};
  std::vector<std::size_t> counts(static_cast<std::size_t>(task_.num_classes()), 0);
  for (std::size_t i = 0; i < rows(); ++i) ++counts[static_cast<std::size_t>(class_of(i))];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(indices.size()), features_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    require(indices[r] < rows(), "subset index out of range");
    x.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(indices[r]));
    y[static_cast<Eigen::Index>(r)] = labels_[static_cast<Eigen::Index>(indices[r])];
  }
  return Dataset(std::move(x), std::move(y), task_, column_names_, true);
}

Dataset Dataset::with_labels(Eigen::VectorXd labels) const {
  return Dataset(features_, std::move(labels), task_, column_names_, is_empty());
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.task_ == b.task_ && a.features_.rows() == b.features_.rows() &&
         a.features_.cols() == b.features_.cols() && a.features_ == b.features_ &&
         a.labels_ == b.labels_ && a.column_names_ == b.column_names_;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  require(a.task() == b.task(), "cannot concatenate datasets with different tasks");
  require(a.cols() == b.cols(), "cannot concatenate datasets with different widths");
  if (b.is_empty()) return a;
  if (a.is_empty()) return b;
  Eigen::MatrixXd x(a.features().rows() + b.features().rows(), a.cols());
  x << a.features(), b.features();
  Eigen::VectorXd y(a.labels().size() + b.labels().size());
  y << a.labels(), b.labels();
  return Dataset(std::move(x), std::move(y), a.task(), a.column_names());
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const TaskKind& task) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");

  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    fail(ErrorKind::Parse, "'" + path.string() + "': empty file (header row required)");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = split_commas(line);
  if (header.size() < 2)
    fail(ErrorKind::Parse, "'" + path.string() + "': header needs at least one feature and a label");
  const std::size_t p = header.size() - 1;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.emplace_back(trim(header[j]));

  std::vector<double> values;
  std::vector<double> labels;
  std::size_t row_number = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != p + 1) {
      fail(ErrorKind::Parse, "'" + path.string() + "' row " + std::to_string(row_number) +
                                 ": expected " + std::to_string(p + 1) + " cells, found " +
                                 std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j <= p; ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v)) {
        fail(ErrorKind::Parse, "'" + path.string() + "' row " + std::to_string(row_number) +
                                   ": non-numeric cell '" + std::string(trim(cells[j])) + "'");
      }
      if (j < p) {
        values.push_back(v);
      } else {
        if (task.is_classification()) {
          const int k = task.num_classes();
          if (v != std::floor(v) || v < 0 || v >= k) {
            fail(ErrorKind::Parse, "'" + path.string() + "' row " + std::to_string(row_number) +
                                       ": class label " + std::string(trim(cells[j])) +
                                       " outside {0,...," + std::to_string(k - 1) + "}");
          }
        }
        labels.push_back(v);
      }
    }
  }
  if (labels.empty()) fail(ErrorKind::Parse, "'" + path.string() + "': no data rows");

  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j)
      x(i, j) = values[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)];
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(labels.data(), n);
  return Dataset(std::move(x), std::move(y), task, std::move(names));
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  const int p = dataset.cols();
  for (int j = 0; j < p; ++j) {
    if (!dataset.column_names().empty())
      out << dataset.column_names()[static_cast<std::size_t>(j)];
    else
      out << 'x' << (j + 1);
    out << ',';
  }
  out << "y\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < dataset.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (int j = 0; j < p; ++j) out << dataset.features()(r, j) << ',';
    if (dataset.task().is_classification())
      out << dataset.class_of(i) << '\n';
    else
      out << dataset.labels()[r] << '\n';
  }
  out.flush();
  if (!out) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) idx.push_back(i);
  return idx;
}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) idx.push_back(i);
  return idx;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed) {
  const std::size_t n = dataset.rows();
  require(k >= 2, "fold count must be at least 2");
  require(static_cast<std::size_t>(k) <= n,
          "fold count " + std::to_string(k) + " exceeds row count " + std::to_string(n));

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  Rng rng(seed, 0xF01D);

  // Rows are laid out class by class (each class shuffled) and dealt round-robin,
  // which balances every class across folds and keeps fold sizes within one.
  std::vector<std::size_t> order;
  order.reserve(n);
  bool stratify = dataset.task().is_classification();
  if (stratify) {
    const auto counts = dataset.class_counts();
    for (std::size_t c : counts) {
      if (c > 0 && c < static_cast<std::size_t>(k)) stratify = false;
    }
    plan.fell_back_unstratified = !stratify;
  }
  if (stratify) {
    const int classes = dataset.task().num_classes();
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(dataset.class_of(i))].push_back(i);
    for (auto& m : members) {
      rng.shuffle(m);
      order.insert(order.end(), m.begin(), m.end());
    }
  } else {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
  }
  for (std::size_t pos = 0; pos < n; ++pos)
    plan.assignments[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  plan.stratified = stratify;
  return plan;
}

double mean_loss(std::span<const double> predictions, std::span<const double> truth, LossKind loss) {
  require(predictions.size() == truth.size(),
          "prediction/truth length mismatch (" + std::to_string(predictions.size()) + " vs " +
              std::to_string(truth.size()) + ")");
  require(!predictions.empty(), "mean_loss needs at least one prediction");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!std::isfinite(predictions[i]))
      fail(ErrorKind::Numeric, "non-finite prediction at index " + std::to_string(i));
    const double d = predictions[i] - truth[i];
    total += loss == LossKind::ZeroOne ? (d != 0.0 ? 1.0 : 0.0) : d * d;
  }
  if (!std::isfinite(total)) fail(ErrorKind::Numeric, "mean loss overflowed");
  return total / static_cast<double>(predictions.size());
}

double mean_loss(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truth, LossKind loss) {
  return mean_loss(std::span<const double>(predictions.data(), static_cast<std::size_t>(predictions.size())),
                   std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())), loss);
}

}  // namespace cls
