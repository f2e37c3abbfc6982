#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cls {

enum class TaskType { Binary, MultiClass, Regression };

/// Supervised task kind. MultiClass carries its class count (K >= 3).
class TaskKind {
 public:
  static TaskKind binary() { return TaskKind(TaskType::Binary, 2); }
  static TaskKind multiclass(int classes);
  static TaskKind regression() { return TaskKind(TaskType::Regression, 0); }

  [[nodiscard]] TaskType type() const { return type_; }
  [[nodiscard]] int num_classes() const { return classes_; }
  [[nodiscard]] bool is_classification() const { return type_ != TaskType::Regression; }
  [[nodiscard]] std::string name() const;

  friend bool operator==(const TaskKind&, const TaskKind&) = default;

 private:
  TaskKind(TaskType type, int classes) : type_(type), classes_(classes) {}
  TaskType type_;
  int classes_;
};

/// Parses "binary", "multiclass:K" or "regression".
TaskKind parse_task(std::string_view text);

enum class LossKind { ZeroOne, SquaredError };

LossKind default_loss(const TaskKind& task);
void check_loss(const TaskKind& task, LossKind loss);
std::string_view loss_name(LossKind loss);

/// Labeled feature matrix. Rows are samples. Immutable after construction.
///
/// Classification labels are stored as doubles holding dense integer ids 0..K-1.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels, TaskKind task,
          std::vector<std::string> column_names = {});

  /// Zero-row dataset with p columns; only meaningful as a concatenation identity.
  static Dataset empty(int p, TaskKind task);

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(features_.rows()); }
  [[nodiscard]] int cols() const { return static_cast<int>(features_.cols()); }
  [[nodiscard]] bool is_empty() const { return features_.rows() == 0; }
  [[nodiscard]] const Eigen::MatrixXd& features() const { return features_; }
  [[nodiscard]] const Eigen::VectorXd& labels() const { return labels_; }
  [[nodiscard]] const TaskKind& task() const { return task_; }
  [[nodiscard]] const std::vector<std::string>& column_names() const { return column_names_; }
  [[nodiscard]] int class_of(std::size_t i) const { return static_cast<int>(labels_[static_cast<Eigen::Index>(i)]); }
  /// Per-class row counts; empty for regression.
  [[nodiscard]] std::vector<std::size_t> class_counts() const;

  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
  [[nodiscard]] Dataset with_labels(Eigen::VectorXd labels) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels, TaskKind task,
          std::vector<std::string> column_names, bool allow_empty);

  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
  TaskKind task_;
  std::vector<std::string> column_names_;
};

/// Row-wise concatenation; tasks and widths must agree.
Dataset concat(const Dataset& a, const Dataset& b);

Dataset load_csv(const std::filesystem::path& path, const TaskKind& task);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

/// k-fold assignment of every row. Stratified per class for classification
/// unless a class has fewer than k members.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
  std::uint64_t seed = 0;
  bool stratified = false;
  /// Set when stratification was requested but class counts did not permit it.
  bool fell_back_unstratified = false;

  [[nodiscard]] std::vector<std::size_t> train_indices(int fold) const;
  [[nodiscard]] std::vector<std::size_t> test_indices(int fold) const;
  [[nodiscard]] std::vector<std::size_t> fold_sizes() const;
};

FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed);

double mean_loss(std::span<const double> predictions, std::span<const double> truth, LossKind loss);
double mean_loss(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truth, LossKind loss);

}  // namespace cls
