#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cls/error.hpp"
#include "cls/numeric.hpp"
#include "cls/rng.hpp"
#include "cls/synth.hpp"

namespace cls {
namespace {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

Eigen::VectorXd random_vector(Rng& rng, int p) {
  Eigen::VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = rng.normal();
  return v;
}

TEST(Hyperspherical, RoundTrip) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd v = random_vector(rng, 2 + static_cast<int>(rng.below(9)));
    const Eigen::VectorXd back = from_hyperspherical(to_hyperspherical(v));
    EXPECT_LE((back - v).norm(), 1e-12 * v.norm());
  }
}

TEST(RotateToCosine, IdentityAtOne) {
  Rng rng(2);
  const Eigen::VectorXd v = random_vector(rng, 10);
  EXPECT_LE((rotate_to_cosine({v, 1.0}) - v).norm(), 1e-10);
}

TEST(RotateToCosine, OrthogonalUnitAxis) {
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  e1[0] = 1.0;
  const Eigen::VectorXd r = rotate_to_cosine({e1, 0.0});
  EXPECT_NEAR(r.dot(e1), 0.0, 1e-10);
  EXPECT_NEAR(r.norm(), 1.0, 1e-10);
}

TEST(RotateToCosine, HitsRequestedCosine) {
  Rng rng(3);
  const Eigen::VectorXd v = random_vector(rng, 10);
  const Eigen::VectorXd r = rotate_to_cosine({v, 0.37});
  EXPECT_NEAR(cosine(v, r), 0.37, 1e-10);
}

TEST(RotateToCosine, ThousandRandomCasesPreserveNormAndCosine) {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const int p = 2 + static_cast<int>(rng.below(14));
    const Eigen::VectorXd v = random_vector(rng, p) * (0.1 + 3.0 * rng.uniform());
    const double c = 2.0 * rng.uniform() - 1.0;
    const Eigen::VectorXd r = rotate_to_cosine({v, c});
    EXPECT_NEAR(r.norm(), v.norm(), 1e-10 * std::max(1.0, v.norm()));
    EXPECT_NEAR(cosine(v, r), c, 1e-10);
  }
}

TEST(RotateToCosine, AxisAlignedBaseVectors) {
  for (int axis = 0; axis < 5; ++axis) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(5);
    v[axis] = 2.0;
    for (double c : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
      const Eigen::VectorXd r = rotate_to_cosine({v, c});
      EXPECT_NEAR(r.norm(), 2.0, 1e-10);
      EXPECT_NEAR(cosine(v, r), c, 1e-10);
    }
  }
}

TEST(RotateToCosine, Errors) {
  EXPECT_THROW((void)rotate_to_cosine({Eigen::VectorXd::Zero(4), 0.5}), Error);
  EXPECT_THROW((void)rotate_to_cosine({Eigen::VectorXd::Ones(4), 1.01}), Error);
  EXPECT_NO_THROW((void)rotate_to_cosine({Eigen::VectorXd::Ones(4), 1.0 + 1e-13}));
}

TEST(OrthogonalComplement, TwoDimensional) {
  Eigen::VectorXd v(2);
  v << 1.0, 0.0;
  const Eigen::VectorXd w = orthogonal_complement(v, 1);
  EXPECT_NEAR(w[0], 0.0, 1e-12);
  EXPECT_NEAR(std::abs(w[1]), 1.0, 1e-12);
}

TEST(OrthogonalComplement, OrthogonalEqualNormDeterministic) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd v = random_vector(rng, 10);
    const Eigen::VectorXd w = orthogonal_complement(v, static_cast<std::uint64_t>(t));
    EXPECT_NEAR(v.dot(w), 0.0, 1e-10);
    EXPECT_NEAR(w.norm(), v.norm(), 1e-10);
    EXPECT_EQ(w, orthogonal_complement(v, static_cast<std::uint64_t>(t)));
  }
  EXPECT_THROW((void)orthogonal_complement(Eigen::VectorXd::Zero(3), 0), Error);
}

TEST(SettingPair, SourceHitsCosineForEverySetting) {
  for (SettingId s : all_settings()) {
    if (setting_uses_alpha(s)) continue;
    for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const SettingPair pair = make_setting_pair(s, c, 17);
      EXPECT_NEAR(cosine(pair.target.coef, pair.source.coef), c, 1e-10) << setting_name(s);
      EXPECT_NEAR(pair.target.coef.norm(), pair.source.coef.norm(), 1e-10);
    }
  }
}

TEST(SettingPair, FourClassVectorsAreOrthogonalAndEqualNorm) {
  const SettingPair pair = make_setting_pair(SettingId::FourClass, 0.3, 9);
  for (const auto* spec : {&pair.target, &pair.source}) {
    EXPECT_NEAR(spec->coef.dot(spec->coef2), 0.0, 1e-10);
    EXPECT_NEAR(spec->coef.norm(), spec->coef2.norm(), 1e-10);
  }
}

TEST(SettingPair, TargetIndependentOfSimilarity) {
  const SettingPair a = make_setting_pair(SettingId::Probit, -0.4, 21);
  const SettingPair b = make_setting_pair(SettingId::Probit, 0.9, 21);
  EXPECT_EQ(a.target.coef, b.target.coef);
}

TEST(SampleDataset, LdaIsBalancedWithExpectedMeans) {
  const SettingPair pair = make_setting_pair(SettingId::Lda, 1.0, 3);
  const Dataset d = sample_dataset(pair.target, 200, 11);
  const auto counts = d.class_counts();
  EXPECT_EQ(counts[0], 100u);
  EXPECT_EQ(counts[1], 100u);
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(10);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.class_of(i) == 1) mean1 += d.features().row(static_cast<Eigen::Index>(i)).transpose();
  }
  mean1 /= 100.0;
  for (int j = 0; j < 10; ++j) EXPECT_NEAR(mean1[j], 0.3, 3.0 / std::sqrt(100.0));
}

TEST(SampleDataset, MixtureAtAlphaZeroMatchesTarget) {
  const SettingPair pair = make_setting_pair(SettingId::Mixture, 0.0, 4);
  const OracleModel t(pair.target), s(pair.source);
  Rng rng(6);
  Eigen::MatrixXd x(50, 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.normal();
  EXPECT_EQ(t.posterior(x), s.posterior(x));
  // Same seed gives the same draws for target and alpha = 0 source.
  const Dataset a = sample_dataset(pair.target, 400, 8);
  const Dataset b = sample_dataset(pair.source, 400, 8);
  EXPECT_EQ(a.features(), b.features());
  // Two-sample mean check on independent draws.
  const Dataset c = sample_dataset(pair.source, 400, 9);
  for (int j = 0; j < 10; ++j) {
    Eigen::VectorXd ya = a.features().col(j), yc = c.features().col(j);
    EXPECT_NEAR(ya.mean(), yc.mean(), 4.0 * std::sqrt(2.0 * 1.09 / 400.0));
  }
}

TEST(SampleDataset, ProbitIsDeterministicAndFollowsTheBoundary) {
  const SettingPair pair = make_setting_pair(SettingId::Probit, 0.2, 5);
  const Dataset a = sample_dataset(pair.source, 500, 77);
  const Dataset b = sample_dataset(pair.source, 500, 77);
  EXPECT_EQ(a.labels(), b.labels());
  EXPECT_EQ(a.features(), b.features());
  // Labels agree with sign(beta' x) at rate E[Phi(|beta'x|)], computed exactly by quadrature.
  const double s = pair.source.coef.norm();
  double expected = 0.0;
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) {
    const double z = -8.0 + 16.0 * (i + 0.5) / steps;
    expected += normal_cdf(std::abs(s * z)) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  }
  expected *= 16.0 / steps;
  const Eigen::VectorXd bayes = bayes_predict(OracleModel(pair.source), a.features());
  const double agree = 1.0 - mean_loss(bayes, a.labels(), LossKind::ZeroOne);
  EXPECT_NEAR(agree, expected, 4.0 * std::sqrt(expected * (1 - expected) / 500.0));
}

TEST(SampleDataset, BalancedSettingsNeedEvenN) {
  const SettingPair pair = make_setting_pair(SettingId::Qda, 0.0, 5);
  EXPECT_THROW((void)sample_dataset(pair.target, 201, 1), Error);
  EXPECT_THROW((void)make_setting_pair(SettingId::Mixture, 1.5, 1), Error);
}

TEST(SampleDataset, LogisticFeaturesHaveArCorrelation) {
  const SettingPair pair = make_setting_pair(SettingId::Logistic, 1.0, 6);
  const Dataset d = sample_dataset(pair.target, 10000, 13);
  double total = 0.0;
  for (int j = 0; j + 1 < 10; ++j) {
    const Eigen::VectorXd a = d.features().col(j).array() - d.features().col(j).mean();
    const Eigen::VectorXd b = d.features().col(j + 1).array() - d.features().col(j + 1).mean();
    total += a.dot(b) / (a.norm() * b.norm());
  }
  EXPECT_NEAR(total / 9.0, 0.5, 0.05);
}

TEST(SampleDataset, FourClassNoiselessLabelsMatchQuadrants) {
  SettingPair pair = make_setting_pair(SettingId::FourClass, 0.5, 7);
  pair.source.noise_sd = 0.0;
  const Dataset d = sample_dataset(pair.source, 1000, 3);
  const Eigen::VectorXd bayes = bayes_predict(OracleModel(pair.source), d.features());
  EXPECT_EQ(bayes, d.labels());
  const auto counts = d.class_counts();
  for (auto c : counts) EXPECT_GT(c, 0u);
}

TEST(OracleModel, PosteriorsSumToOne) {
  Rng rng(8);
  Eigen::MatrixXd x(40, 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 1.5 * rng.normal();
  for (SettingId s : all_settings()) {
    if (!setting_task(s).is_classification()) continue;
    const SettingPair pair = make_setting_pair(s, 0.4, 2);
    const Eigen::MatrixXd post = OracleModel(pair.source).posterior(x);
    for (Eigen::Index i = 0; i < post.rows(); ++i) {
      EXPECT_NEAR(post.row(i).sum(), 1.0, 1e-12) << setting_name(s);
      EXPECT_GE(post.row(i).minCoeff(), 0.0);
    }
  }
}

TEST(OracleModel, BayesRuleExamples) {
  const SettingPair lda = make_setting_pair(SettingId::Lda, 1.0, 1);
  Eigen::MatrixXd mu = lda.target.coef.transpose();
  EXPECT_EQ(bayes_predict(OracleModel(lda.target), mu)[0], 1.0);

  const SettingPair probit = make_setting_pair(SettingId::Probit, 1.0, 1);
  Eigen::MatrixXd along = probit.target.coef.transpose();
  EXPECT_EQ(bayes_predict(OracleModel(probit.target), along)[0], 1.0);
  EXPECT_EQ(bayes_predict(OracleModel(probit.target), -along)[0], 0.0);

  const SettingPair nl = make_setting_pair(SettingId::NonlinearRegression, 1.0, 1);
  EXPECT_DOUBLE_EQ(bayes_predict(OracleModel(nl.target), Eigen::MatrixXd::Zero(1, 10))[0], nl.target.coef[3]);

  EXPECT_THROW((void)bayes_predict(OracleModel(lda.target), Eigen::MatrixXd::Zero(1, 3)), Error);
}

TEST(GeneratorSpec, JsonRoundTrip) {
  const SettingPair pair = make_setting_pair(SettingId::FourClass, -0.2, 12);
  const GeneratorSpec back = generator_spec_from_json(to_json(pair.source));
  EXPECT_EQ(back.setting, pair.source.setting);
  EXPECT_EQ(back.role, Role::Source);
  EXPECT_EQ(back.coef, pair.source.coef);
  EXPECT_EQ(back.coef2, pair.source.coef2);
  EXPECT_EQ(back.similarity, pair.source.similarity);
  EXPECT_EQ(back.seed, pair.source.seed);
  EXPECT_THROW((void)generator_spec_from_json("{not json"), Error);
}

}  // namespace
}  // namespace cls
