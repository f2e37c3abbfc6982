#include <benchmark/benchmark.h>

#include "cls/estimators.hpp"
#include "cls/metrics.hpp"
#include "cls/models.hpp"
#include "cls/synth.hpp"

namespace {

cls::Dataset probit_data(std::size_t n, std::uint64_t seed) {
  const cls::SettingPair pair = cls::make_setting_pair(cls::SettingId::Probit, 0.5, seed);
  return cls::sample_dataset(pair.target, n, seed + 1);
}

void BM_Fit(benchmark::State& state, const char* id) {
  const cls::Dataset d = probit_data(static_cast<std::size_t>(state.range(0)), 1);
  const cls::ModelSpec spec = cls::parse_model(id);
  for (auto _ : state) benchmark::DoNotOptimize(cls::fit(spec, d));
  state.SetComplexityN(state.range(0));
}
BENCHMARK_CAPTURE(BM_Fit, logreg, "logreg")->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_Fit, svm_linear, "svm-linear")->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_Fit, svm_rbf, "svm-rbf")->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_Fit, gbt, "gbt")->Arg(200)->Arg(800);

void BM_Sinkhorn(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd cost = Eigen::MatrixXd::Random(n, n).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(cls::sinkhorn_cost(cost, 0.05, 200));
}
BENCHMARK(BM_Sinkhorn)->Arg(100)->Arg(200);

void BM_Otdd(benchmark::State& state) {
  const cls::Dataset a = probit_data(200, 3);
  const cls::Dataset b = probit_data(200, 4);
  for (auto _ : state) benchmark::DoNotOptimize(cls::otdd_gaussian(a, b));
}
BENCHMARK(BM_Otdd);

void BM_EnsembleCls(benchmark::State& state) {
  const cls::SettingPair pair = cls::make_setting_pair(cls::SettingId::Probit, 0.5, 5);
  const cls::Dataset t = cls::sample_dataset(pair.target, 200, 6);
  const cls::Dataset s = cls::sample_dataset(pair.source, 200, 7);
  const auto models = cls::default_models(t.task());
  cls::EstimatorOptions options;
  for (auto _ : state) benchmark::DoNotOptimize(cls::cls_ensemble(models, t, s, options));
}
BENCHMARK(BM_EnsembleCls)->Unit(benchmark::kMillisecond);

void BM_MonteCarloOracle(benchmark::State& state) {
  const cls::SettingPair pair = cls::make_setting_pair(cls::SettingId::Qda, 0.5, 8);
  const cls::OracleModel t(pair.target), s(pair.source);
  for (auto _ : state) benchmark::DoNotOptimize(cls::oracle_monte_carlo(t, s, 20000, 9));
}
BENCHMARK(BM_MonteCarloOracle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
