#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cls/estimators.hpp"
#include "cls/models.hpp"
#include "cls/synth.hpp"
#include "cls/zones.hpp"

namespace cls {

/// -1.0:0.1:1.0 for cosine settings, 0.0:0.1:1.0 for the mixture weight.
std::vector<double> default_grid(SettingId setting);

/// Runs `count` independent tasks on up to `threads` workers (0 = hardware
/// concurrency). Task i must only write to slot i of its output.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

struct SweepConfig {
  SettingId setting = SettingId::Probit;
  std::vector<double> grid;
  int replicates = 50;
  int n = 200;
  int p = 10;
  /// Model library for the multi-model schemes; each also gets a single-model column.
  std::vector<ModelSpec> models;
  /// Extra single-model columns (e.g. the setting's optimal model).
  std::vector<ModelSpec> extra_models;
  std::vector<Scheme> schemes = {Scheme::UnweightedAvg, Scheme::WeightedAvg, Scheme::Ensemble};
  /// Any of "kl", "w2", "otdd"; otdd is skipped for regression.
  std::vector<std::string> metrics = {"kl", "w2", "otdd"};
  std::uint64_t seed = 0;
  int folds = 5;
  double lambda = 500.0;
  /// Monte-Carlo oracle sample size per replicate for settings without a closed form.
  std::size_t mc_samples = 20000;
  int threads = 0;

  /// Fills empty grid/model lists with the setting defaults and validates.
  void finalize();
};

enum class ColumnKind { Oracle, Estimate, Metric };

struct SweepReport {
  SweepConfig config;
  std::vector<std::string> columns;
  std::vector<ColumnKind> kinds;
  /// values[g][c]: mean over successful replicates at grid point g.
  std::vector<std::vector<double>> values;
  /// Absolute correlations of each column with the grid (0 for constant columns).
  std::vector<double> pearson_abs;
  std::vector<double> spearman_abs;
  /// Diff against the oracle column for estimate columns, NaN otherwise.
  std::vector<double> diff;
  std::vector<int> failures;
  std::vector<std::string> failure_messages;
  bool oracle_closed_form = true;

  [[nodiscard]] std::size_t column(const std::string& name) const;
  [[nodiscard]] std::vector<double> column_values(const std::string& name) const;
};

SweepReport run_sweep(SweepConfig config);

/// Mean absolute deviation (1/h) sum |est_i - oracle_i|.
double diff_metric(const std::vector<double>& estimates, const std::vector<double>& oracles);

/// (|Pearson|, |Spearman|); either is 0 when an input has zero variance.
std::pair<double, double> pearson_spearman(const std::vector<double>& x, const std::vector<double>& y);

/// CSV with one row per grid point plus footer rows pearson_abs, spearman_abs, diff.
std::string sweep_csv(const SweepReport& report);
std::string sweep_json(const SweepReport& report);

struct ZoneConfig {
  SettingId setting = SettingId::Probit;
  std::vector<double> grid;
  int replicates = 20;
  int n_target = 200;
  int n_source = 200;
  /// Target training rows per class; the rest of the target sample is held out.
  int train_per_class = 30;
  std::vector<std::string> methods = {"naive", "tradaboost"};
  std::vector<ModelSpec> models;
  /// Learner used by the transfer methods and their baseline (default: the first model).
  std::optional<ModelSpec> transfer_model;
  int tradaboost_rounds = 20;
  double gamma1 = 1.0;
  double gamma2 = 5.0;
  std::uint64_t seed = 0;
  int folds = 5;
  double lambda = 500.0;
  int p = 10;
  int threads = 0;

  void finalize();
};

struct ZoneRow {
  double similarity = 0.0;
  double mean_cls = 0.0;
  double mean_e0 = 0.0;
  double mean_se = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
  /// Verdict of the mean CLS against the mean thresholds.
  Zone zone = Zone::Ambiguous;
  /// Per-replicate verdicts.
  std::vector<Zone> replicate_zones;
  double mean_methods_beating = 0.0;
  double naive_beat_rate = 0.0;
  /// Mean of (baseline error - naive error).
  double mean_naive_gain = 0.0;
  std::vector<bool> naive_beat;
};

struct ZoneReport {
  ZoneConfig config;
  std::vector<ZoneRow> rows;
};

ZoneReport run_zone_experiment(ZoneConfig config);
std::string zone_csv(const ZoneReport& report);

/// Aligned text table from CSV text (numbers rounded to `digits` decimals).
std::string render_table(const std::string& csv, int digits = 4);

}  // namespace cls
