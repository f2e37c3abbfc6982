#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include "cls/error.hpp"
#include "cls/harness.hpp"

namespace cls {
namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(DefaultGrid, CosineAndMixtureAxes) {
  const auto cos = default_grid(SettingId::Probit);
  ASSERT_EQ(cos.size(), 21u);
  EXPECT_DOUBLE_EQ(cos.front(), -1.0);
  EXPECT_DOUBLE_EQ(cos.back(), 1.0);
  EXPECT_NEAR(cos[13], 0.3, 1e-15);
  const auto alpha = default_grid(SettingId::Mixture);
  ASSERT_EQ(alpha.size(), 11u);
  EXPECT_DOUBLE_EQ(alpha.front(), 0.0);
}

TEST(DiffMetric, Examples) {
  EXPECT_DOUBLE_EQ(diff_metric({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}), 0.0);
  EXPECT_NEAR(diff_metric({0.1, 0.5}, {0.2, 0.2}), 0.2, 1e-15);
  EXPECT_THROW((void)diff_metric({0.1}, {0.1, 0.2}), Error);
}

TEST(Correlations, Examples) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const auto [p1, s1] = pearson_spearman(x, {2, 4, 6, 8, 10});
  EXPECT_NEAR(p1, 1.0, 1e-15);
  EXPECT_NEAR(s1, 1.0, 1e-15);
  const auto [p2, s2] = pearson_spearman(x, {10, 8, 6, 4, 1});
  EXPECT_GT(p2, 0.99);
  EXPECT_NEAR(s2, 1.0, 1e-15);
  const auto [p3, s3] = pearson_spearman(x, {1, 4, 9, 16, 100});
  EXPECT_LT(p3, 1.0);
  EXPECT_NEAR(s3, 1.0, 1e-15);
  const auto [p4, s4] = pearson_spearman(x, {3, 3, 3, 3, 3});
  EXPECT_EQ(p4, 0.0);
  EXPECT_EQ(s4, 0.0);
  // Ties get average ranks: ranks (1.5, 1.5, 3) against (1, 2, 3).
  const auto [p5, s5] = pearson_spearman({1, 2, 3}, {0, 0, 1});
  EXPECT_NEAR(s5, std::sqrt(0.75), 1e-12);
  (void)p5;
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
  for (int threads : {1, 3}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, threads, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  EXPECT_THROW(parallel_for(10, 2,
                            [](std::size_t i) {
                              if (i == 7) fail(ErrorKind::Numeric, "boom");
                            }),
               Error);
}

SweepConfig small_sweep() {
  SweepConfig cfg;
  cfg.setting = SettingId::Probit;
  cfg.grid = {-1.0, 0.0, 1.0};
  cfg.replicates = 2;
  cfg.n = 80;
  cfg.models = parse_model_list("logreg,svm-linear");
  cfg.metrics = {"kl", "w2"};
  cfg.seed = 17;
  cfg.threads = 1;
  return cfg;
}

TEST(Sweep, ColumnsOracleAndFooters) {
  const SweepReport rep = run_sweep(small_sweep());
  const std::vector<std::string> expected = {"oracle", "logreg", "svm-linear", "probit", "avg", "wavg", "ensemble", "kl", "w2"};
  EXPECT_EQ(rep.columns, expected);
  ASSERT_EQ(rep.values.size(), 3u);
  EXPECT_TRUE(rep.oracle_closed_form);
  const auto oracle = rep.column_values("oracle");
  EXPECT_LT(oracle[2], oracle[1]);
  EXPECT_LT(oracle[1], oracle[0]);
  // Replicates share the orthogonal case exactly.
  EXPECT_NEAR(oracle[1], 0.5, 1e-12);
  const auto ens = rep.column_values("ensemble");
  EXPECT_NEAR(rep.diff[rep.column("ensemble")], diff_metric(ens, oracle), 1e-15);
  EXPECT_TRUE(std::isnan(rep.diff[rep.column("kl")]));
  EXPECT_TRUE(std::isnan(rep.diff[rep.column("oracle")]));
  for (int f : rep.failures) EXPECT_EQ(f, 0);
}

TEST(Sweep, ResultsDoNotDependOnThreadCount) {
  SweepConfig a = small_sweep();
  SweepConfig b = small_sweep();
  b.threads = 3;
  const SweepReport ra = run_sweep(a);
  const SweepReport rb = run_sweep(b);
  EXPECT_EQ(ra.values, rb.values);
}

TEST(Sweep, CsvLayout) {
  const SweepReport rep = run_sweep(small_sweep());
  const auto rows = lines(sweep_csv(rep));
  ASSERT_EQ(rows.size(), 1u + 3u + 3u);
  EXPECT_EQ(rows[0], "cosine,oracle,logreg,svm-linear,probit,avg,wavg,ensemble,kl,w2");
  EXPECT_EQ(rows[1].substr(0, 3), "-1,");
  EXPECT_EQ(rows[4].substr(0, 12), "pearson_abs,");
  EXPECT_EQ(rows[5].substr(0, 13), "spearman_abs,");
  EXPECT_EQ(rows[6].substr(0, 6), "diff,,");
  EXPECT_NE(sweep_json(rep).find("\"columns\""), std::string::npos);
}

TEST(Sweep, ConfigValidation) {
  SweepConfig cfg = small_sweep();
  cfg.replicates = 0;
  EXPECT_THROW(cfg.finalize(), Error);
  cfg = small_sweep();
  cfg.metrics = {"tv"};
  EXPECT_THROW(cfg.finalize(), Error);
  cfg = small_sweep();
  cfg.grid = {1.5};
  EXPECT_THROW(cfg.finalize(), Error);
  cfg = small_sweep();
  cfg.setting = SettingId::LinearRegression;
  cfg.models.clear();
  cfg.metrics = {"kl", "otdd"};
  cfg.finalize();
  EXPECT_EQ(cfg.metrics, std::vector<std::string>{"kl"});
  EXPECT_EQ(cfg.models.front().algorithm, Algorithm::Ols);
}

TEST(Sweep, MonteCarloOracleForSettingsWithoutClosedForm) {
  SweepConfig cfg = small_sweep();
  cfg.setting = SettingId::Qda;
  cfg.grid = {1.0};
  cfg.replicates = 1;
  cfg.mc_samples = 4000;
  const SweepReport rep = run_sweep(cfg);
  EXPECT_FALSE(rep.oracle_closed_form);
  const double oracle = rep.column_values("oracle")[0];
  EXPECT_GT(oracle, 0.0);
  EXPECT_LT(oracle, 0.5);
}

ZoneConfig small_zones() {
  ZoneConfig cfg;
  cfg.grid = {-1.0, 1.0};
  cfg.replicates = 2;
  cfg.n_target = 160;
  cfg.n_source = 160;
  cfg.train_per_class = 30;
  cfg.models = parse_model_list("logreg,svm-linear");
  cfg.tradaboost_rounds = 4;
  cfg.seed = 3;
  cfg.threads = 1;
  return cfg;
}

TEST(Zones, DissimilarSourcesScoreHigher) {
  const ZoneReport rep = run_zone_experiment(small_zones());
  ASSERT_EQ(rep.rows.size(), 2u);
  const ZoneRow& far = rep.rows[0];
  const ZoneRow& near = rep.rows[1];
  EXPECT_GT(far.mean_cls, near.mean_cls);
  EXPECT_EQ(far.zone, Zone::NegativeTransfer);
  for (const ZoneRow& r : rep.rows) {
    EXPECT_DOUBLE_EQ(r.tau1, r.mean_e0 + r.mean_se);
    EXPECT_DOUBLE_EQ(r.tau2, r.mean_e0 + 5.0 * r.mean_se);
    EXPECT_EQ(r.zone, classify(r.mean_cls, thresholds(r.mean_e0, r.mean_se)));
    EXPECT_EQ(r.replicate_zones.size(), 2u);
    EXPECT_GE(r.mean_methods_beating, 0.0);
    EXPECT_LE(r.mean_methods_beating, 2.0);
  }
  const auto rows = lines(zone_csv(rep));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].substr(0, 14), "cosine,cls,e0,");
}

TEST(Zones, ConfigValidation) {
  ZoneConfig cfg = small_zones();
  cfg.setting = SettingId::FourClass;
  EXPECT_THROW(cfg.finalize(), Error);
  cfg = small_zones();
  cfg.train_per_class = 2;
  EXPECT_THROW(cfg.finalize(), Error);
  cfg = small_zones();
  cfg.methods = {"magic"};
  EXPECT_THROW(cfg.finalize(), Error);
}

TEST(RenderTable, AlignsColumns) {
  const std::string table = render_table("a,bb\n1.23456,2\nx,\n", 2);
  const auto rows = lines(table);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NE(rows[0].find("bb"), std::string::npos);
  EXPECT_EQ(rows[1].find_first_not_of('-'), rows[1].find(' '));
  EXPECT_NE(rows[2].find("1.23"), std::string::npos);
  EXPECT_EQ(rows[2].find("1.234"), std::string::npos);
  EXPECT_EQ(rows[0].size(), rows[2].size());
}

}  // namespace
}  // namespace cls
