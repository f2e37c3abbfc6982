#include "cls/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cls/error.hpp"
#include "cls/metrics.hpp"
#include "cls/numeric.hpp"
#include "cls/rng.hpp"
#include "cls/transfer.hpp"

namespace cls {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed streams; grid points share the replicate streams so columns are paired.
constexpr std::uint64_t kTargetSample = 0xD0;
constexpr std::uint64_t kSourceSample = 0xD1;
constexpr std::uint64_t kTargetFolds = 0x7A;
constexpr std::uint64_t kSourceFolds = 0x5C;
constexpr std::uint64_t kOracle = 0x0C0;
constexpr std::uint64_t kSplit = 0x5B;
constexpr std::uint64_t kBoost = 0xB0;

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

double abs_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy));
}

Dataset stratified_take(const Dataset& data, int per_class, std::uint64_t seed, Dataset* rest) {
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0);
  rng.shuffle(order);
  std::vector<int> taken(static_cast<std::size_t>(std::max(data.task().num_classes(), 1)), 0);
  std::vector<std::size_t> keep, other;
  for (auto i : order) {
    const std::size_t c = data.task().is_classification() ? static_cast<std::size_t>(data.class_of(i)) : 0;
    const int limit = data.task().is_classification() ? per_class : 2 * per_class;
    if (taken[c] < limit) {
      ++taken[c];
      keep.push_back(i);
    } else {
      other.push_back(i);
    }
  }
  std::sort(keep.begin(), keep.end());
  std::sort(other.begin(), other.end());
  require(!other.empty(), "zone experiment: no rows left for the held-out target split");
  *rest = data.subset(other);
  return data.subset(keep);
}

std::optional<ModelSpec> optimal_model(SettingId setting) {
  switch (setting) {
    case SettingId::Probit: return parse_model("probit");
    case SettingId::Lda: return parse_model("lda");
    case SettingId::Qda: return parse_model("qda");
    default: return std::nullopt;
  }
}

std::vector<ModelSpec> resolve_all(const std::vector<ModelSpec>& models, const TaskKind& task) {
  std::vector<ModelSpec> out;
  for (const auto& m : models) {
    ModelSpec r = resolve_for_task(m, task);
    if (!r.supports(task)) fail(ErrorKind::UnsupportedTask, "model " + r.id() + " does not support " + task.name());
    out.push_back(r);
  }
  return out;
}

double single_error(const DomainFit& fit, std::size_t i, const Dataset& other, LossKind loss) {
  if (!fit.ok(i)) fail(ErrorKind::Numeric, "model " + fit.models[i].id() + " failed: " +
                                               (fit.failures.empty() ? std::string("unknown") : fit.failures.front()));
  return mean_loss(predict(*fit.fitted[i], other.features()), other.labels(), loss);
}

}  // namespace

std::vector<double> default_grid(SettingId setting) {
  std::vector<double> grid;
  if (setting_uses_alpha(setting)) {
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  } else {
    for (int i = -10; i <= 10; ++i) grid.push_back(i / 10.0);
  }
  return grid;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void SweepConfig::finalize() {
  if (grid.empty()) grid = default_grid(setting);
  const TaskKind task = setting_task(setting);
  if (models.empty()) models = default_models(task);
  if (extra_models.empty()) {
    if (auto opt = optimal_model(setting)) extra_models.push_back(*opt);
  }
  models = resolve_all(models, task);
  extra_models = resolve_all(extra_models, task);
  for (const auto& m : models) m.validate();
  require(std::is_sorted(grid.begin(), grid.end()), "sweep: grid must be sorted");
  require(replicates >= 1, "sweep: replicates must be >= 1");
  require(n >= 2 && n % 2 == 0, "sweep: n must be an even number >= 2");
  require(folds >= 2 && folds <= n, "sweep: folds must lie in [2, n]");
  require(mc_samples >= 2, "sweep: mc_samples must be >= 2");
  for (const auto& m : metrics) {
    require(m == "kl" || m == "w2" || m == "otdd", "sweep: unknown metric '" + m + "'");
  }
  if (!task.is_classification()) std::erase(metrics, std::string("otdd"));
  for (double v : grid) {
    if (setting_uses_alpha(setting)) {
      require(v >= 0.0 && v <= 1.0, "sweep: mixture weights must lie in [0, 1]");
    } else {
      require(v >= -1.0 && v <= 1.0, "sweep: cosine values must lie in [-1, 1]");
    }
  }
}

std::size_t SweepReport::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  require(it != columns.end(), "sweep report has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> SweepReport::column_values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& row : values) out.push_back(row[c]);
  return out;
}

SweepReport run_sweep(SweepConfig config) {
  config.finalize();
  const TaskKind task = setting_task(config.setting);
  const LossKind loss = default_loss(task);
  const bool need_cv = std::any_of(config.schemes.begin(), config.schemes.end(),
                                   [](Scheme s) { return s == Scheme::WeightedAvg || s == Scheme::Ensemble; });

  SweepReport report;
  report.columns.push_back("oracle");
  report.kinds.push_back(ColumnKind::Oracle);
  for (const auto& m : config.models) {
    report.columns.push_back(m.id());
    report.kinds.push_back(ColumnKind::Estimate);
  }
  for (const auto& m : config.extra_models) {
    report.columns.push_back(m.id());
    report.kinds.push_back(ColumnKind::Estimate);
  }
  for (Scheme s : config.schemes) {
    require(s == Scheme::UnweightedAvg || s == Scheme::WeightedAvg || s == Scheme::Ensemble,
            "sweep: schemes must be avg, wavg or ensemble");
    report.columns.push_back(std::string(scheme_name(s)));
    report.kinds.push_back(ColumnKind::Estimate);
  }
  for (const auto& m : config.metrics) {
    report.columns.push_back(m);
    report.kinds.push_back(ColumnKind::Metric);
  }
  {
    const SettingPair probe = make_setting_pair(config.setting, config.grid.front(), config.seed, config.p);
    report.oracle_closed_form = oracle_closed_form(probe.target, probe.source).has_value();
  }

  const std::size_t g_count = config.grid.size();
  const std::size_t r_count = static_cast<std::size_t>(config.replicates);
  const std::size_t cols = report.columns.size();
  // cells[r][g] holds one replicate's column values, empty on failure.
  std::vector<std::vector<std::vector<double>>> cells(r_count, std::vector<std::vector<double>>(g_count));
  std::vector<std::vector<std::string>> errors(r_count, std::vector<std::string>(g_count));

  parallel_for(r_count, config.threads, [&](std::size_t r) {
    const std::uint64_t rs = config.seed + r;
    std::optional<Dataset> target;
    std::optional<DomainFit> tf, tf_extra;
    EstimatorOptions topt{config.folds, config.lambda, derive_seed(rs, kTargetFolds), loss};
    EstimatorOptions sopt{config.folds, config.lambda, derive_seed(rs, kSourceFolds), loss};
    for (std::size_t g = 0; g < g_count; ++g) {
      try {
        const SettingPair pair = make_setting_pair(config.setting, config.grid[g], rs, config.p);
        if (!target) {
          target = sample_dataset(pair.target, static_cast<std::size_t>(config.n), derive_seed(rs, kTargetSample));
          tf = fit_domain(config.models, *target, topt, need_cv);
          tf_extra = fit_domain(config.extra_models, *target, topt, false);
        }
        const Dataset source =
            sample_dataset(pair.source, static_cast<std::size_t>(config.n), derive_seed(rs, kSourceSample));
        const DomainFit sf = fit_domain(config.models, source, sopt, need_cv);
        const DomainFit sf_extra = fit_domain(config.extra_models, source, sopt, false);

        std::vector<double> row;
        row.reserve(cols);
        if (auto closed = oracle_closed_form(pair.target, pair.source)) {
          row.push_back(*closed);
        } else {
          const ClsEstimate mc = oracle_monte_carlo(OracleModel(pair.target), OracleModel(pair.source),
                                                    config.mc_samples, derive_seed(rs, kOracle + g));
          row.push_back(mc.score);
        }
        for (std::size_t i = 0; i < config.models.size(); ++i) {
          row.push_back(0.5 * (single_error(*tf, i, source, loss) + single_error(sf, i, *target, loss)));
        }
        for (std::size_t i = 0; i < config.extra_models.size(); ++i) {
          row.push_back(0.5 * (single_error(*tf_extra, i, source, loss) + single_error(sf_extra, i, *target, loss)));
        }
        for (Scheme s : config.schemes) row.push_back(cls_from_fits(s, *tf, *target, sf, source, sopt).score);
        for (const auto& m : config.metrics) {
          if (m == "kl") row.push_back(kl_gaussian(*target, source));
          if (m == "w2") row.push_back(w2_gaussian(*target, source));
          if (m == "otdd") row.push_back(otdd_gaussian(*target, source));
        }
        cells[r][g] = std::move(row);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::UnsupportedTask) throw;
        errors[r][g] = e.what();
      }
    }
  });

  report.values.assign(g_count, std::vector<double>(cols, 0.0));
  report.failures.assign(g_count, 0);
  for (std::size_t g = 0; g < g_count; ++g) {
    int ok = 0;
    for (std::size_t r = 0; r < r_count; ++r) {
      if (cells[r][g].empty()) {
        ++report.failures[g];
        report.failure_messages.push_back("grid " + format_number(config.grid[g]) + ", replicate " +
                                          std::to_string(r) + ": " + errors[r][g]);
        continue;
      }
      ++ok;
      for (std::size_t c = 0; c < cols; ++c) report.values[g][c] += cells[r][g][c];
    }
    if (static_cast<double>(report.failures[g]) > 0.2 * static_cast<double>(r_count) || ok == 0) {
      fail(ErrorKind::Numeric, "sweep: " + std::to_string(report.failures[g]) + " of " + std::to_string(r_count) +
                                   " replicates failed at grid value " + format_number(config.grid[g]) +
                                   (report.failure_messages.empty() ? "" : " (" + report.failure_messages.back() + ")"));
    }
    for (auto& v : report.values[g]) v /= ok;
  }

  const std::vector<double> oracle = report.column_values("oracle");
  for (std::size_t c = 0; c < cols; ++c) {
    const std::vector<double> col = report.column_values(report.columns[c]);
    const auto [pe, sp] = g_count >= 2 ? pearson_spearman(config.grid, col) : std::pair{0.0, 0.0};
    report.pearson_abs.push_back(pe);
    report.spearman_abs.push_back(sp);
    report.diff.push_back(report.kinds[c] == ColumnKind::Estimate ? diff_metric(col, oracle) : kNaN);
  }
  report.config = std::move(config);
  return report;
}

double diff_metric(const std::vector<double>& estimates, const std::vector<double>& oracles) {
  require(estimates.size() == oracles.size(), "diff: length mismatch");
  require(!estimates.empty(), "diff: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) total += std::abs(estimates[i] - oracles[i]);
  return total / static_cast<double>(estimates.size());
}

std::pair<double, double> pearson_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "correlation: length mismatch");
  require(x.size() >= 2, "correlation: need at least two points");
  return {abs_pearson(x, y), abs_pearson(ranks(x), ranks(y))};
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << (setting_uses_alpha(report.config.setting) ? "alpha" : "cosine");
  for (const auto& c : report.columns) out << ',' << c;
  out << '\n';
  for (std::size_t g = 0; g < report.values.size(); ++g) {
    out << format_number(report.config.grid[g]);
    for (double v : report.values[g]) out << ',' << format_number(v);
    out << '\n';
  }
  auto footer = [&](const char* name, const std::vector<double>& v) {
    out << name;
    for (double x : v) out << ',' << format_number(x);
    out << '\n';
  };
  footer("pearson_abs", report.pearson_abs);
  footer("spearman_abs", report.spearman_abs);
  footer("diff", report.diff);
  return out.str();
}

std::string sweep_json(const SweepReport& report) {
  const auto& c = report.config;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : c.models) models.push_back(nlohmann::json::parse(to_json(m)));
  nlohmann::json extra = nlohmann::json::array();
  for (const auto& m : c.extra_models) extra.push_back(nlohmann::json::parse(to_json(m)));
  std::vector<std::string> schemes;
  for (Scheme s : c.schemes) schemes.emplace_back(scheme_name(s));
  auto nan_null = [](const std::vector<double>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (double x : v) arr.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
    return arr;
  };
  nlohmann::json j;
  j["config"] = {{"setting", std::string(setting_name(c.setting))},
                 {"grid", c.grid},
                 {"replicates", c.replicates},
                 {"n", c.n},
                 {"p", c.p},
                 {"models", models},
                 {"extra_models", extra},
                 {"schemes", schemes},
                 {"metrics", c.metrics},
                 {"seed", c.seed},
                 {"folds", c.folds},
                 {"lambda", c.lambda},
                 {"mc_samples", c.mc_samples}};
  j["oracle"] = report.oracle_closed_form ? "closed-form" : "monte-carlo";
  j["columns"] = report.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.values) rows.push_back(nan_null(row));
  j["rows"] = rows;
  j["pearson_abs"] = nan_null(report.pearson_abs);
  j["spearman_abs"] = nan_null(report.spearman_abs);
  j["diff"] = nan_null(report.diff);
  j["failures"] = report.failures;
  j["failure_messages"] = report.failure_messages;
  return j.dump(2);
}

void ZoneConfig::finalize() {
  if (grid.empty()) grid = default_grid(setting);
  const TaskKind task = setting_task(setting);
  if (models.empty()) models = default_models(task);
  models = resolve_all(models, task);
  if (!transfer_model) transfer_model = models.front();
  transfer_model = resolve_for_task(*transfer_model, task);
  require(!methods.empty(), "zone experiment: at least one transfer method is required");
  for (const auto& m : methods) {
    require(m == "naive" || m == "tradaboost", "zone experiment: unknown transfer method '" + m + "'");
    if (m == "tradaboost") {
      require(task.type() == TaskType::Binary, "zone experiment: tradaboost needs a binary setting",
              ErrorKind::UnsupportedTask);
    }
  }
  require(replicates >= 1, "zone experiment: replicates must be >= 1");
  require(train_per_class >= folds, "zone experiment: need at least one training row per class and fold");
  require(gamma1 < gamma2, "zone experiment: gamma1 must be smaller than gamma2");
  require(tradaboost_rounds >= 2, "zone experiment: tradaboost needs at least two rounds");
}

ZoneReport run_zone_experiment(ZoneConfig config) {
  config.finalize();
  const TaskKind task = setting_task(config.setting);
  const LossKind loss = default_loss(task);
  const std::size_t g_count = config.grid.size();
  const auto r_count = static_cast<std::size_t>(config.replicates);

  struct Cell {
    double cls = 0.0, e0 = 0.0, se = 0.0;
    Zone zone = Zone::Ambiguous;
    int beating = 0;
    bool naive_beat = false;
    double naive_gain = 0.0;
  };
  std::vector<std::vector<Cell>> cells(r_count, std::vector<Cell>(g_count));

  parallel_for(r_count, config.threads, [&](std::size_t r) {
    const std::uint64_t rs = config.seed + r;
    std::optional<Dataset> train, test;
    std::optional<DomainFit> tf;
    BaselineError base;
    EstimatorOptions topt{config.folds, config.lambda, derive_seed(rs, kTargetFolds), loss};
    EstimatorOptions sopt{config.folds, config.lambda, derive_seed(rs, kSourceFolds), loss};
    for (std::size_t g = 0; g < g_count; ++g) {
      const SettingPair pair = make_setting_pair(config.setting, config.grid[g], rs, config.p);
      if (!train) {
        const Dataset full =
            sample_dataset(pair.target, static_cast<std::size_t>(config.n_target), derive_seed(rs, kTargetSample));
        Dataset rest = Dataset::empty(full.cols(), task);
        train = stratified_take(full, config.train_per_class, derive_seed(rs, kSplit), &rest);
        test = rest;
        tf = fit_domain(config.models, *train, topt, true);
        base = baseline_from_fit(*tf, Scheme::Ensemble, *train, topt);
      }
      const Dataset source =
          sample_dataset(pair.source, static_cast<std::size_t>(config.n_source), derive_seed(rs, kSourceSample));
      const DomainFit sf = fit_domain(config.models, source, sopt, true);
      Cell& cell = cells[r][g];
      cell.cls = cls_from_fits(Scheme::Ensemble, *tf, *train, sf, source, sopt).score;
      cell.e0 = base.e0;
      cell.se = base.se;
      cell.zone = classify(cell.cls, thresholds(base.e0, base.se, config.gamma1, config.gamma2));
      for (const auto& method : config.methods) {
        TransferOutcome outcome;
        if (method == "naive") {
          outcome = naive_pool_transfer(*config.transfer_model, *train, source, *test, loss);
          cell.naive_beat = outcome.beat_baseline;
          cell.naive_gain = outcome.baseline_error - outcome.test_error;
        } else {
          TrAdaBoostOptions opts;
          opts.rounds = config.tradaboost_rounds;
          opts.seed = derive_seed(rs, kBoost + g);
          outcome = tradaboost(*config.transfer_model, *train, source, *test, opts);
        }
        cell.beating += outcome.beat_baseline ? 1 : 0;
      }
    }
  });

  ZoneReport report;
  for (std::size_t g = 0; g < g_count; ++g) {
    ZoneRow row;
    row.similarity = config.grid[g];
    int naive_beats = 0;
    for (std::size_t r = 0; r < r_count; ++r) {
      const Cell& c = cells[r][g];
      row.mean_cls += c.cls;
      row.mean_e0 += c.e0;
      row.mean_se += c.se;
      row.mean_methods_beating += c.beating;
      row.mean_naive_gain += c.naive_gain;
      naive_beats += c.naive_beat ? 1 : 0;
      row.replicate_zones.push_back(c.zone);
      row.naive_beat.push_back(c.naive_beat);
    }
    const auto n = static_cast<double>(r_count);
    row.mean_cls /= n;
    row.mean_e0 /= n;
    row.mean_se /= n;
    row.mean_methods_beating /= n;
    row.mean_naive_gain /= n;
    row.naive_beat_rate = naive_beats / n;
    const ZoneThresholds t = thresholds(row.mean_e0, row.mean_se, config.gamma1, config.gamma2);
    row.tau1 = t.tau1;
    row.tau2 = t.tau2;
    row.zone = classify(row.mean_cls, t);
    report.rows.push_back(std::move(row));
  }
  report.config = std::move(config);
  return report;
}

std::string zone_csv(const ZoneReport& report) {
  std::ostringstream out;
  out << (setting_uses_alpha(report.config.setting) ? "alpha" : "cosine")
      << ",cls,e0,se_e0,tau1,tau2,zone,pt_frac,az_frac,nt_frac,methods_beating,naive_beat_rate,naive_gain\n";
  for (const auto& row : report.rows) {
    const auto n = static_cast<double>(row.replicate_zones.size());
    auto frac = [&](Zone z) { return std::count(row.replicate_zones.begin(), row.replicate_zones.end(), z) / n; };
    out << format_number(row.similarity) << ',' << format_number(row.mean_cls) << ',' << format_number(row.mean_e0)
        << ',' << format_number(row.mean_se) << ',' << format_number(row.tau1) << ',' << format_number(row.tau2) << ','
        << zone_label(row.zone) << ',' << format_number(frac(Zone::PositiveTransfer)) << ','
        << format_number(frac(Zone::Ambiguous)) << ',' << format_number(frac(Zone::NegativeTransfer)) << ','
        << format_number(row.mean_methods_beating) << ',' << format_number(row.naive_beat_rate) << ','
        << format_number(row.mean_naive_gain) << '\n';
  }
  return out.str();
}

std::string render_table(const std::string& csv, int digits) {
  std::vector<std::vector<std::string>> cells;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (line.back() == ',') row.emplace_back();
    cells.push_back(std::move(row));
  }
  require(!cells.empty(), "report: CSV input is empty", ErrorKind::Parse);
  for (std::size_t r = 1; r < cells.size(); ++r) {
    for (auto& cell : cells[r]) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec == std::errc() && res.ptr == cell.data() + cell.size() && !cell.empty()) {
        std::ostringstream fmt;
        fmt.setf(std::ios::fixed);
        fmt.precision(digits);
        fmt << v;
        cell = fmt.str();
      }
    }
  }
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c > 0) out << "  ";
      const auto pad = width[c] - cells[r][c].size();
      if (c == 0) {
        out << cells[r][c] << std::string(pad, ' ');
      } else {
        out << std::string(pad, ' ') << cells[r][c];
      }
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace cls
