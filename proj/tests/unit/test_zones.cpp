#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cls/error.hpp"
#include "cls/synth.hpp"
#include "cls/zones.hpp"
#include "test_support.hpp"

namespace cls {
namespace {

TEST(Thresholds, Arithmetic) {
  const ZoneThresholds t = thresholds(0.2, 0.01);
  EXPECT_DOUBLE_EQ(t.tau1, 0.21);
  EXPECT_DOUBLE_EQ(t.tau2, 0.25);
  const ZoneThresholds u = thresholds(0.2, 0.01, 2.0, 3.0);
  EXPECT_DOUBLE_EQ(u.tau1, 0.22);
  EXPECT_DOUBLE_EQ(u.tau2, 0.23);
}

TEST(Thresholds, RejectsInvalidInput) {
  EXPECT_THROW((void)thresholds(0.2, -0.1), Error);
  EXPECT_THROW((void)thresholds(0.2, 0.1, 5.0, 1.0), Error);
  EXPECT_THROW((void)thresholds(std::nan(""), 0.1), Error);
}

TEST(Classify, BoundariesBelongToTheAmbiguousZone) {
  const ZoneThresholds t = thresholds(0.2, 0.01);
  EXPECT_EQ(classify(0.2, t), Zone::PositiveTransfer);
  EXPECT_EQ(classify(t.tau1, t), Zone::Ambiguous);
  EXPECT_EQ(classify(0.23, t), Zone::Ambiguous);
  EXPECT_EQ(classify(t.tau2, t), Zone::Ambiguous);
  EXPECT_EQ(classify(0.26, t), Zone::NegativeTransfer);
  EXPECT_EQ(classify(std::nextafter(t.tau1, 0.0), t), Zone::PositiveTransfer);
  EXPECT_EQ(classify(std::nextafter(t.tau2, 1.0), t), Zone::NegativeTransfer);
  EXPECT_THROW((void)classify(std::numeric_limits<double>::infinity(), t), Error);
}

TEST(Classify, ZeroStandardErrorCollapsesTheAmbiguousZone) {
  const ZoneThresholds t = thresholds(0.1, 0.0);
  EXPECT_EQ(classify(0.1, t), Zone::Ambiguous);
  EXPECT_EQ(classify(0.099, t), Zone::PositiveTransfer);
  EXPECT_EQ(classify(0.101, t), Zone::NegativeTransfer);
}

TEST(Zone, Labels) {
  EXPECT_EQ(zone_label(Zone::PositiveTransfer), "PT");
  EXPECT_EQ(zone_label(Zone::Ambiguous), "AZ");
  EXPECT_EQ(zone_label(Zone::NegativeTransfer), "NT");
}

TEST(RelativeErrorReduction, Examples) {
  EXPECT_DOUBLE_EQ(relative_error_reduction(0.2, 0.15), 0.25);
  EXPECT_DOUBLE_EQ(relative_error_reduction(0.2, 0.3), -0.5);
  EXPECT_THROW((void)relative_error_reduction(0.0, 0.1), Error);
}

class BaselineData : public ::testing::Test {
 protected:
  void SetUp() override {
    const SettingPair pair = make_setting_pair(SettingId::Probit, 1.0, 3);
    target = sample_dataset(pair.target, 150, 4);
    options.seed = 21;
  }
  std::vector<ModelSpec> models = parse_model_list("logreg,svm-linear,gbt");
  Dataset target = Dataset::empty(10, TaskKind::binary());
  EstimatorOptions options;
};

TEST_F(BaselineData, SingleSchemeIsTheFirstModelCvError) {
  const BaselineError b = baseline_error(models, Scheme::Single, target, options);
  const CvResult cv = cv_error(models[0], target, make_folds(target, options.folds, options.seed), LossKind::ZeroOne);
  EXPECT_DOUBLE_EQ(b.e0, cv.mean);
  EXPECT_DOUBLE_EQ(b.se, cv.se);
}

TEST_F(BaselineData, AverageSchemeAveragesMemberCvErrors) {
  const BaselineError b = baseline_error(models, Scheme::UnweightedAvg, target, options);
  const FoldPlan folds = make_folds(target, options.folds, options.seed);
  double mean = 0.0;
  for (const auto& m : models) mean += cv_error(m, target, folds, LossKind::ZeroOne).mean / 3.0;
  EXPECT_NEAR(b.e0, mean, 1e-12);
}

TEST_F(BaselineData, EnsembleOfOneModelIsTheSingleBaseline) {
  const BaselineError a = baseline_error({models[1]}, Scheme::Ensemble, target, options);
  const BaselineError b = baseline_error({models[1]}, Scheme::Single, target, options);
  EXPECT_DOUBLE_EQ(a.e0, b.e0);
  EXPECT_DOUBLE_EQ(a.se, b.se);
}

TEST_F(BaselineData, EnsembleBaselineIsAnErrorRateWithFoldLosses) {
  const BaselineError b = baseline_error(models, Scheme::Ensemble, target, options);
  EXPECT_EQ(b.fold_losses.size(), 5u);
  EXPECT_GE(b.e0, 0.0);
  EXPECT_LE(b.e0, 1.0);
  EXPECT_GE(b.se, 0.0);
}

TEST_F(BaselineData, FromFitMatchesDirectComputation) {
  const DomainFit fit = fit_domain(models, target, options, true);
  const BaselineError a = baseline_from_fit(fit, Scheme::Ensemble, target, options);
  const BaselineError b = baseline_error(models, Scheme::Ensemble, target, options);
  EXPECT_EQ(a.e0, b.e0);
  EXPECT_EQ(a.se, b.se);
  const DomainFit no_cv = fit_domain(models, target, options, false);
  EXPECT_THROW((void)baseline_from_fit(no_cv, Scheme::Ensemble, target, options), Error);
}

}  // namespace
}  // namespace cls
