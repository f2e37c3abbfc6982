#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cls/dataset.hpp"

namespace cls {

/// Controlled-cosine rotation request: rotate `base` so that the result has
/// cosine `target_cosine` with it.
struct RotationSpec {
  Eigen::VectorXd base;
  double target_cosine = 1.0;
};

/// Hyperspherical coordinates (r, phi_1..phi_{p-1}) of a vector. The last
/// angle covers [0, 2pi) so the sign of the final coordinate survives.
struct Hyperspherical {
  double radius = 0.0;
  std::vector<double> angles;
};

Hyperspherical to_hyperspherical(const Eigen::VectorXd& v);
Eigen::VectorXd from_hyperspherical(const Hyperspherical& h);

/// Shifts the first polar angle by arccos(c) and rebuilds the vector; norm is
/// preserved and cos(base, result) = c.
Eigen::VectorXd rotate_to_cosine(const RotationSpec& spec);

/// Gram-Schmidt complement of a seeded random direction: orthogonal to `v`
/// with the same norm. Deterministic in (v, seed).
Eigen::VectorXd orthogonal_complement(const Eigen::VectorXd& v, std::uint64_t seed);

enum class SettingId {
  Logistic,
  Probit,
  Lda,
  Qda,
  Mixture,
  FourClass,
  LinearRegression,
  NonlinearRegression,
};

enum class Role { Target, Source };

std::string_view setting_name(SettingId id);
SettingId parse_setting(std::string_view name);
const std::vector<SettingId>& all_settings();
TaskKind setting_task(SettingId id);
/// True when the similarity axis is the mixture weight alpha instead of a cosine.
bool setting_uses_alpha(SettingId id);

/// Fully resolved parameters of one synthetic data-generating distribution.
///
///  - Logistic / Probit / LinearRegression: `coef` is beta (length p).
///  - NonlinearRegression: `coef` is beta in R^4 acting on x1..x5.
///  - Lda / Qda: `coef` is the class-1 mean mu (class 0 has -mu).
///  - Mixture: `coef` is mu(t), `coef2` is the shifted mean mu(s); `alpha` mixes them.
///  - FourClass: `coef` and `coef2` are the orthogonal, equal-norm beta_1, beta_2.
///
/// `noise_sd` is the probit/regression noise sd (1) or the four-class sigma (0.3).
struct GeneratorSpec {
  SettingId setting = SettingId::Probit;
  Role role = Role::Target;
  int p = 10;
  Eigen::VectorXd coef;
  Eigen::VectorXd coef2;
  double similarity = 1.0;
  double alpha = 0.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  [[nodiscard]] TaskKind task() const { return setting_task(setting); }
  void validate() const;
};

std::string to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(std::string_view json);

struct SettingPair {
  GeneratorSpec target;
  GeneratorSpec source;
};

/// Builds the target spec from `replicate_seed` (beta ~ N(1/4, I/16), fixed means,
/// mixture shift mean ~ N(-0.3, 0.5^2)) and derives the source spec at the
/// requested cosine, or mixture weight for the Mixture setting.
SettingPair make_setting_pair(SettingId setting, double similarity, std::uint64_t replicate_seed,
                              int p = 10);

/// Draws n labeled rows. Lda/Qda/Mixture are exactly class-balanced and need even n.
Dataset sample_dataset(const GeneratorSpec& spec, std::size_t n, std::uint64_t seed);

/// Exact Bayes rule of a generator: argmax posterior (classification) or E[Y|X].
class OracleModel {
 public:
  explicit OracleModel(GeneratorSpec spec);

  [[nodiscard]] const GeneratorSpec& spec() const { return spec_; }
  [[nodiscard]] TaskKind task() const { return spec_.task(); }

  /// Posterior class probabilities, one row per query point (classification only).
  [[nodiscard]] Eigen::MatrixXd posterior(const Eigen::MatrixXd& x) const;
  /// Bayes prediction; ties go to the smaller class id.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

 private:
  struct GaussianTerm {
    Eigen::VectorXd mean;
    Eigen::MatrixXd precision;
    double log_norm = 0.0;
  };
  double log_density(const GaussianTerm& g, const Eigen::VectorXd& x) const;

  GeneratorSpec spec_;
  GaussianTerm qda0_, qda1_;
};

Eigen::VectorXd bayes_predict(const OracleModel& oracle, const Eigen::MatrixXd& x);

}  // namespace cls
