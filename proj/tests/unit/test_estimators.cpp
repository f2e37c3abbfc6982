#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cls/error.hpp"
#include "cls/estimators.hpp"
#include "cls/synth.hpp"
#include "test_support.hpp"

namespace cls {
namespace {

double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Eigen::VectorXd random_vector(std::mt19937_64& gen, int p) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = n01(gen);
  return v;
}

// Direct simulation of the probit model: y = 1[beta'x + eps > 0], Bayes rule sign(beta'x).
double probit_cross_error(const Eigen::VectorXd& rule, const Eigen::VectorXd& truth, double sigma, int n,
                          std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  int wrong = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = random_vector(gen, static_cast<int>(rule.size()));
    const bool y = truth.dot(x) + sigma * n01(gen) > 0;
    const bool h = rule.dot(x) > 0;
    wrong += y != h;
  }
  return static_cast<double>(wrong) / n;
}

TEST(SoftmaxWeights, Examples) {
  const std::vector<double> errs = {0.1, 0.1, 0.2};
  const EnsembleWeights w0 = softmax_weights(errs, 0.0);
  for (double w : w0.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
  const EnsembleWeights w = softmax_weights(errs, 10.0);
  const double e = std::exp(-1.0);
  EXPECT_NEAR(w.weights[0], 1.0 / (2.0 + e), 1e-15);
  EXPECT_NEAR(w.weights[2], e / (2.0 + e), 1e-15);
  const EnsembleWeights sharp = softmax_weights(errs, 500.0);
  EXPECT_NEAR(sharp.weights[0], 0.5, 1e-15);
  EXPECT_LT(sharp.weights[2], 1e-20);
  EXPECT_THROW((void)softmax_weights({}, 1.0), Error);
  EXPECT_THROW((void)softmax_weights(errs, -1.0), Error);
}

TEST(SoftmaxWeights, FormAProbabilityVectorOrderedByError) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> errs(5);
    for (auto& e : errs) e = u(gen);
    const auto w = softmax_weights(errs, 50.0).weights;
    double total = 0.0;
    for (double v : w) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (std::size_t i = 0; i < errs.size(); ++i) {
      for (std::size_t j = 0; j < errs.size(); ++j) {
        if (errs[i] < errs[j]) EXPECT_GE(w[i], w[j]);
      }
    }
  }
}

TEST(AsymmetricCls, HalfWeightIsTheSymmetricScore) {
  EXPECT_DOUBLE_EQ(cls_weighted_asymmetric(0.5, 0.2, 0.4), 0.3);
  EXPECT_DOUBLE_EQ(cls_weighted_asymmetric(0.25, 0.2, 0.4), 0.35);
  EXPECT_THROW((void)cls_weighted_asymmetric(0.0, 0.2, 0.4), Error);
  EXPECT_THROW((void)cls_weighted_asymmetric(1.0, 0.2, 0.4), Error);
}

TEST(ProbitOracle, OrthogonalCoefficientsGiveOneHalf) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd b = random_vector(gen, 10);
    const Eigen::VectorXd o = orthogonal_complement(b, static_cast<std::uint64_t>(t));
    for (double s2 : {0.0, 0.5, 1.0, 4.0}) EXPECT_NEAR(oracle_probit({b, o, s2}), 0.5, 1e-12);
  }
}

TEST(ProbitOracle, NoiselessLimitIsAngleOverPi) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd a = random_vector(gen, 7);
    const Eigen::VectorXd b = random_vector(gen, 7);
    const double angle = std::acos(a.dot(b) / (a.norm() * b.norm()));
    EXPECT_NEAR(oracle_probit({a, b, 0.0}), angle / std::numbers::pi, 1e-12);
    EXPECT_NEAR(oracle_probit_smallnoise(angle), angle / std::numbers::pi, 1e-15);
  }
}

TEST(ProbitOracle, MatchesDirectSimulation) {
  std::mt19937_64 gen(4);
  const Eigen::VectorXd bt = random_vector(gen, 4);
  for (double c : {-0.6, 0.0, 0.7}) {
    const Eigen::VectorXd bs = rotate_to_cosine({bt, c});
    const int n = 100000;
    const double e_t = probit_cross_error(bt, bs, 1.0, n, gen);
    const double e_s = probit_cross_error(bs, bt, 1.0, n, gen);
    const double sim = 0.5 * (e_t + e_s);
    const double se = 0.5 * std::sqrt(e_t * (1 - e_t) / n + e_s * (1 - e_s) / n);
    EXPECT_NEAR(oracle_probit({bt, bs, 1.0}), sim, 4.0 * se) << "cosine " << c;
  }
}

TEST(LdaOracle, ReferenceValuesOfTheDefaultSetting) {
  // mu = 0.3 * 1_10 on both sides, so the oracle is Phi(-|mu| c).
  const double norm = 0.3 * std::sqrt(10.0);
  const std::vector<std::pair<double, double>> cases = {{1.0, 0.1714}, {0.0, 0.5}, {-1.0, 0.8286}};
  for (const auto& [c, expected] : cases) {
    const SettingPair pair = make_setting_pair(SettingId::Lda, c, 0);
    const double value = *oracle_closed_form(pair.target, pair.source);
    EXPECT_NEAR(value, phi(-norm * c), 1e-12);
    EXPECT_NEAR(value, expected, 5e-5);
  }
}

TEST(LinearOracle, ClosedFormMatchesSimulation) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;
  const Eigen::VectorXd bt = random_vector(gen, 3);
  const Eigen::VectorXd bs = random_vector(gen, 3);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = random_vector(gen, 3);
    const double y = bs.dot(x) + n01(gen);
    const double l = std::pow(y - bt.dot(x), 2);
    sum += l;
    sum2 += l * l;
  }
  const double m = sum / n;
  const double se = std::sqrt((sum2 / n - m * m) / n);
  EXPECT_NEAR(oracle_linear_regression(bt, bs, 1.0), m, 4.0 * se);
  EXPECT_DOUBLE_EQ(oracle_linear_regression(bt, bt, 0.7), 0.7);
}

TEST(MonteCarloOracle, AgreesWithClosedForms) {
  for (SettingId s : {SettingId::Probit, SettingId::Lda, SettingId::LinearRegression}) {
    for (double c : {-0.5, 0.5}) {
      const SettingPair pair = make_setting_pair(s, c, 11);
      const ClsEstimate mc = oracle_monte_carlo(OracleModel(pair.target), OracleModel(pair.source), 100000, 12);
      EXPECT_GT(mc.mc_se, 0.0);
      EXPECT_NEAR(mc.score, *oracle_closed_form(pair.target, pair.source), 4.0 * mc.mc_se)
          << setting_name(s) << " c=" << c;
    }
  }
}

TEST(MonteCarloOracle, IsDeterministicInTheSeed) {
  const SettingPair pair = make_setting_pair(SettingId::Qda, 0.3, 1);
  const OracleModel t(pair.target), s(pair.source);
  EXPECT_EQ(oracle_monte_carlo(t, s, 2000, 5).score, oracle_monte_carlo(t, s, 2000, 5).score);
  EXPECT_NE(oracle_monte_carlo(t, s, 2000, 5).score, oracle_monte_carlo(t, s, 2000, 6).score);
}

TEST(ClosedForm, OnlyForSettingsThatHaveOne) {
  for (SettingId s : all_settings()) {
    const SettingPair pair = make_setting_pair(s, setting_uses_alpha(s) ? 0.5 : 0.5, 1);
    const bool expected = s == SettingId::Probit || s == SettingId::Lda || s == SettingId::LinearRegression;
    EXPECT_EQ(oracle_closed_form(pair.target, pair.source).has_value(), expected) << setting_name(s);
  }
}

class EstimatorData : public ::testing::Test {
 protected:
  void SetUp() override {
    const SettingPair pair = make_setting_pair(SettingId::Probit, 0.2, 7);
    target = sample_dataset(pair.target, 120, 8);
    source = sample_dataset(pair.source, 120, 9);
  }
  std::vector<ModelSpec> models = parse_model_list("logreg,svm-linear,gbt");
  Dataset target = Dataset::empty(10, TaskKind::binary());
  Dataset source = Dataset::empty(10, TaskKind::binary());
};

TEST_F(EstimatorData, SingleModelMatchesManualComputation) {
  const ClsEstimate est = cls_single(models[0], target, source, LossKind::ZeroOne);
  const double e_t = mean_loss(predict(fit(models[0], target), source.features()), source.labels(), LossKind::ZeroOne);
  const double e_s = mean_loss(predict(fit(models[0], source), target.features()), target.labels(), LossKind::ZeroOne);
  EXPECT_EQ(est.e_t, e_t);
  EXPECT_EQ(est.e_s, e_s);
  EXPECT_EQ(est.score, 0.5 * (e_t + e_s));
}

TEST_F(EstimatorData, SingleAndAverageAreSymmetric) {
  const ClsEstimate a = cls_unweighted_avg(models, target, source, LossKind::ZeroOne);
  const ClsEstimate b = cls_unweighted_avg(models, source, target, LossKind::ZeroOne);
  EXPECT_EQ(a.e_t, b.e_s);
  EXPECT_EQ(a.e_s, b.e_t);
  EXPECT_NEAR(a.score, b.score, 1e-15);
}

TEST_F(EstimatorData, AverageIsTheMeanOfSingleModelScores) {
  const ClsEstimate avg = cls_unweighted_avg(models, target, source, LossKind::ZeroOne);
  double mean = 0.0;
  for (const auto& m : models) mean += cls_single(m, target, source, LossKind::ZeroOne).score / 3.0;
  EXPECT_NEAR(avg.score, mean, 1e-15);
  ASSERT_EQ(avg.model_scores.size(), 3u);
}

TEST_F(EstimatorData, WeightedAverageWithZeroLambdaIsTheAverage) {
  EstimatorOptions opt;
  opt.lambda = 0.0;
  opt.seed = 3;
  EXPECT_NEAR(cls_weighted_avg(models, target, source, opt).score,
              cls_unweighted_avg(models, target, source, LossKind::ZeroOne).score, 1e-15);
}

TEST_F(EstimatorData, WeightedAverageUsesMeanOfDomainWeights) {
  EstimatorOptions opt;
  opt.seed = 4;
  opt.lambda = 20.0;
  const ClsEstimate est = cls_weighted_avg(models, target, source, opt);
  ASSERT_TRUE(est.target_weights && est.source_weights);
  double total = 0.0, score = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(est.model_weights[i], 0.5 * (est.target_weights->weights[i] + est.source_weights->weights[i]), 1e-15);
    total += est.model_weights[i];
    score += est.model_weights[i] * est.model_scores[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(est.score, score, 1e-12);
}

TEST_F(EstimatorData, EnsembleOfOneModelIsTheSingleModel) {
  EstimatorOptions opt;
  opt.seed = 5;
  const ClsEstimate ens = cls_ensemble({models[0]}, target, source, opt);
  const ClsEstimate single = cls_single(models[0], target, source, LossKind::ZeroOne);
  EXPECT_EQ(ens.e_t, single.e_t);
  EXPECT_EQ(ens.e_s, single.e_s);
}

TEST_F(EstimatorData, EnsembleWithDominantModelFollowsIt) {
  // With a huge lambda the best-CV model carries (almost) all the weight.
  EstimatorOptions opt;
  opt.seed = 6;
  opt.lambda = 1e6;
  const ClsEstimate ens = cls_ensemble(models, target, source, opt);
  const auto& wt = ens.target_weights->weights;
  const auto best = static_cast<std::size_t>(std::max_element(wt.begin(), wt.end()) - wt.begin());
  if (wt[best] > 1.0 - 1e-12) {
    EXPECT_EQ(ens.e_t, cls_single(models[best], target, source, LossKind::ZeroOne).e_t);
  }
}

TEST_F(EstimatorData, ScoresLieInTheUnitInterval) {
  EstimatorOptions opt;
  opt.seed = 7;
  for (const ClsEstimate& est : {cls_ensemble(models, target, source, opt), cls_weighted_avg(models, target, source, opt),
                                 cls_unweighted_avg(models, target, source, LossKind::ZeroOne)}) {
    EXPECT_GE(est.score, 0.0);
    EXPECT_LE(est.score, 1.0);
    EXPECT_DOUBLE_EQ(est.score, 0.5 * (est.e_t + est.e_s));
  }
}

TEST_F(EstimatorData, SameDatasetGivesTrainingError) {
  const ClsEstimate est = cls_single(models[0], target, target, LossKind::ZeroOne);
  EXPECT_EQ(est.e_t, est.e_s);
}

TEST_F(EstimatorData, EnsembleIsDeterministic) {
  EstimatorOptions opt;
  opt.seed = 9;
  EXPECT_EQ(cls_ensemble(models, target, source, opt).score, cls_ensemble(models, target, source, opt).score);
}

TEST_F(EstimatorData, RejectsMismatchedInputs) {
  const Dataset reg = testing::linear_data(50, Eigen::VectorXd::Ones(10), 1.0, 1);
  EXPECT_THROW((void)cls_single(models[0], target, reg, LossKind::ZeroOne), Error);
  const Dataset narrow = testing::gaussian_blobs(50, 3, 1.0, 1);
  EXPECT_THROW((void)cls_single(models[0], target, narrow, LossKind::ZeroOne), Error);
  EXPECT_THROW((void)cls_single(models[0], target, source, LossKind::SquaredError), Error);
}

TEST(Estimators, RegressionUsesSquaredError) {
  const SettingPair pair = make_setting_pair(SettingId::LinearRegression, 1.0, 3);
  const Dataset t = sample_dataset(pair.target, 200, 4);
  const Dataset s = sample_dataset(pair.source, 200, 5);
  const ClsEstimate est = cls_single(parse_model("ols"), t, s, LossKind::SquaredError);
  // Identical coefficients: both cross losses estimate the noise variance.
  EXPECT_NEAR(est.score, 1.0, 0.3);
}

TEST(Scheme, ParseAndName) {
  EXPECT_EQ(parse_scheme("avg"), Scheme::UnweightedAvg);
  EXPECT_EQ(parse_scheme("wavg"), Scheme::WeightedAvg);
  EXPECT_EQ(parse_scheme("ensemble"), Scheme::Ensemble);
  EXPECT_EQ(scheme_name(Scheme::Ensemble), "ensemble");
  EXPECT_THROW((void)parse_scheme("median"), Error);
}

TEST(ClsJson, ContainsTheScore) {
  ClsEstimate est;
  est.score = 0.25;
  est.e_t = 0.2;
  est.e_s = 0.3;
  const std::string j = to_json(est);
  EXPECT_NE(j.find("\"score\""), std::string::npos);
  EXPECT_NE(j.find("0.25"), std::string::npos);
}

}  // namespace
}  // namespace cls
