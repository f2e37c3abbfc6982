// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cls/dataset.hpp"
#include "cls/enchead.hpp"
#include "cls/error.hpp"
#include "cls/estimators.hpp"
#include "cls/harness.hpp"
#include "cls/metrics.hpp"
#include "cls/rng.hpp"
#include "cls/synth.hpp"
#include "cls/zones.hpp"

namespace {

using namespace cls;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int g_replicates = 50;
int g_zone_replicates = 20;

// Sweeps are shared between criteria; each setting runs once.
std::map<SettingId, SweepReport> g_sweeps;

const SweepReport& sweep_for(SettingId setting) {
  auto it = g_sweeps.find(setting);
  if (it != g_sweeps.end()) return it->second;
  SweepConfig cfg;
  cfg.setting = setting;
  cfg.replicates = g_replicates;
  cfg.n = 200;
  cfg.p = 10;
  cfg.seed = 2024;
  cfg.metrics = setting == SettingId::Probit ? std::vector<std::string>{"kl", "w2"} : std::vector<std::string>{};
  return g_sweeps.emplace(setting, run_sweep(cfg)).first->second;
}

double relative_range(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return (*hi - *lo) / std::abs(mean);
}

Eigen::VectorXd random_vector(std::mt19937_64& gen, int p) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = n01(gen);
  return v;
}

void criterion_1(Check& c) {
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(10, 0.3);
  const Eigen::VectorXd other = orthogonal_complement(mu, 1);
  const double at_minus = oracle_lda({mu, -mu});
  const double at_zero = oracle_lda({mu, other});
  const double at_plus = oracle_lda({mu, mu});
  c.expect(std::abs(at_minus - 0.8286) <= 1e-4, "lda cos=-1");
  c.expect(std::abs(at_zero - 0.5) <= 1e-4, "lda cos=0");
  c.expect(std::abs(at_plus - 0.1714) <= 1e-4, "lda cos=1");

  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> power(-3, 3);
  double worst_exact = 0.0, worst_gs = 0.0, worst_lemma = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd a = random_vector(gen, 10);
    // Quarter-turns of coordinate pairs scaled by powers of two: a'b is exactly 0 in floating point.
    Eigen::VectorXd exact(10);
    for (int k = 0; k < 10; k += 2) {
      const double s = std::ldexp(1.0, power(gen));
      exact[k] = -a[k + 1] * s;
      exact[k + 1] = a[k] * s;
    }
    for (double s2 : {0.0, 1.0, 2.5}) {
      worst_exact = std::max(worst_exact, std::abs(oracle_probit({a, exact, s2}) - 0.5));
    }
    // Gram-Schmidt complements are orthogonal only up to rounding.
    worst_gs = std::max(worst_gs, std::abs(oracle_probit({a, orthogonal_complement(a, static_cast<std::uint64_t>(t)), 1.0}) - 0.5));
    const Eigen::VectorXd b = random_vector(gen, 10);
    const double angle = std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
    worst_lemma = std::max(worst_lemma, std::abs(oracle_probit({a, b, 0.0}) - angle / std::numbers::pi));
  }
  c.expect(worst_exact == 0.0, "probit orthogonal is exactly 0.5");
  c.expect(worst_gs <= 1e-15, "probit Gram-Schmidt orthogonal within rounding");
  c.expect(worst_lemma <= 1e-12, "probit sigma^2=0 vs theta/pi");
  c.detail << "lda(-1,0,1)=" << at_minus << "," << at_zero << "," << at_plus << " max|orth-0.5| exact=" << worst_exact
           << " gram-schmidt=" << worst_gs << " max|lemma|=" << worst_lemma;
}

void criterion_2(Check& c) {
  double worst = 0.0;
  for (SettingId s : {SettingId::Probit, SettingId::Lda}) {
    for (double cos : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const SettingPair pair = make_setting_pair(s, cos, 7);
      const double closed = *oracle_closed_form(pair.target, pair.source);
      const ClsEstimate mc = oracle_monte_carlo(OracleModel(pair.target), OracleModel(pair.source), 200000, 8);
      const double z = std::abs(mc.score - closed) / mc.mc_se;
      worst = std::max(worst, z);
      c.expect(z <= 3.0, std::string(setting_name(s)) + " c=" + std::to_string(cos));
    }
  }
  c.detail << "max |mc - closed| / se = " << worst;
}

void criterion_3(Check& c) {
  const SweepReport& rep = sweep_for(SettingId::Probit);
  const std::size_t e = rep.column("ensemble");
  c.expect(rep.diff[e] <= 0.03, "Diff <= 0.03");
  c.expect(rep.spearman_abs[e] >= 0.99, "|rho_s| >= 0.99");
  c.detail << "replicates=" << rep.config.replicates << " Diff=" << rep.diff[e] << " |rho_s|=" << rep.spearman_abs[e];
}

void criterion_4(Check& c) {
  const SweepReport& rep = sweep_for(SettingId::Lda);
  const std::size_t e = rep.column("ensemble");
  c.expect(rep.diff[e] <= 0.03, "Diff <= 0.03");
  const auto oracle = rep.column_values("oracle");
  const double norm = 0.3 * std::sqrt(10.0);
  double worst = 0.0;
  for (std::size_t g = 0; g < rep.config.grid.size(); ++g) {
    const double theorem = 0.5 * std::erfc(norm * rep.config.grid[g] / std::numbers::sqrt2);
    worst = std::max(worst, std::abs(oracle[g] - theorem));
  }
  c.expect(worst <= 1e-12, "oracle column equals the closed form");
  c.detail << "Diff=" << rep.diff[e] << " max|oracle - closed form|=" << worst;
}

void criterion_5(Check& c) {
  int passed = 0;
  for (SettingId s : all_settings()) {
    const SweepReport& rep = sweep_for(s);
    bool ok = false;
    if (s == SettingId::Qda || s == SettingId::NonlinearRegression) {
      const double rho = rep.spearman_abs[rep.column("ensemble")];
      ok = rho >= 0.95;
      c.detail << " " << setting_name(s) << ":rho=" << rho;
    } else {
      const double avg = rep.diff[rep.column("avg")];
      const double wavg = rep.diff[rep.column("wavg")];
      const double ens = rep.diff[rep.column("ensemble")];
      ok = wavg <= avg && ens <= avg;
      c.detail << " " << setting_name(s) << ":avg/wavg/ens=" << avg << "/" << wavg << "/" << ens;
    }
    c.detail << (ok ? "(ok)" : "(x)");
    passed += ok ? 1 : 0;
  }
  c.expect(passed >= 6, "at least 6 of 8 settings");
  c.detail << " passed=" << passed << "/8";
}

void criterion_6(Check& c) {
  for (SettingId s : {SettingId::NonlinearRegression, SettingId::LinearRegression}) {
    const SettingPair pair = make_setting_pair(s, 1.0, 3);
    const ClsEstimate mc = oracle_monte_carlo(OracleModel(pair.target), OracleModel(pair.source), 200000, 4);
    const double z = std::abs(mc.score - 1.0) / mc.mc_se;
    c.expect(z <= 3.0, std::string(setting_name(s)));
    c.detail << " " << setting_name(s) << "=" << mc.score << " (se " << mc.mc_se << ")";
  }
}

void criterion_7(Check& c) {
  ZoneConfig cfg;
  cfg.setting = SettingId::Probit;
  cfg.replicates = g_zone_replicates;
  cfg.methods = {"naive"};
  cfg.seed = 77;
  const ZoneReport rep = run_zone_experiment(cfg);
  const ZoneRow& lo = rep.rows.front();
  const ZoneRow& hi = rep.rows.back();
  c.expect(hi.similarity == 1.0 && lo.similarity == -1.0, "grid spans [-1, 1]");
  c.expect(hi.zone == Zone::PositiveTransfer, "c=1 verdict PT");
  c.expect(hi.naive_beat_rate >= 0.8, "c=1 naive beats baseline in >= 80%");
  c.expect(lo.zone == Zone::NegativeTransfer, "c=-1 verdict NT");
  c.expect(1.0 - lo.naive_beat_rate >= 0.8, "c=-1 naive fails in >= 80%");

  // Paired seeds: within every replicate, no PT verdict below an NT verdict.
  int violations = 0;
  for (std::size_t r = 0; r < static_cast<std::size_t>(cfg.replicates); ++r) {
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      for (std::size_t j = i + 1; j < rep.rows.size(); ++j) {
        if (rep.rows[i].replicate_zones[r] == Zone::PositiveTransfer &&
            rep.rows[j].replicate_zones[r] == Zone::NegativeTransfer) {
          ++violations;
        }
      }
    }
  }
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.rows.size(); ++j) {
      if (rep.rows[i].zone == Zone::PositiveTransfer && rep.rows[j].zone == Zone::NegativeTransfer) ++violations;
    }
  }
  c.expect(violations == 0, "monotone PT -> AZ -> NT");
  std::string zones;
  for (const auto& row : rep.rows) zones += std::string(zone_label(row.zone)) + " ";
  c.detail << "c=1: " << zone_label(hi.zone) << " beat=" << hi.naive_beat_rate << "; c=-1: " << zone_label(lo.zone)
           << " beat=" << lo.naive_beat_rate << "; violations=" << violations << "; zones(-1..1)=" << zones;
}

void criterion_8(Check& c) {
  const SettingPair pair = make_setting_pair(SettingId::Probit, 0.3, 5);
  const Dataset a = sample_dataset(pair.target, 200, 6);
  const double kl_self = kl_gaussian(a, a);
  const double w2_self = w2_gaussian(a, a);
  const double otdd_self = otdd_gaussian(a, a);
  c.expect(kl_self == 0.0, "kl self = 0");
  c.expect(w2_self <= 1e-6, "w2 self <= 1e-6");
  c.expect(otdd_self <= 1e-6, "otdd self <= 1e-6");

  Eigen::VectorXd m(10);
  for (int i = 0; i < 10; ++i) m[i] = 0.1 * (i + 1) * (i % 2 == 0 ? 1 : -1);
  const GaussianFit n0{Eigen::VectorXd::Zero(10), Eigen::MatrixXd::Identity(10, 10)};
  const GaussianFit nm{m, Eigen::MatrixXd::Identity(10, 10)};
  const double w2_pop = w2_gaussian(n0, nm);
  c.expect(std::abs(w2_pop - m.norm()) <= 1e-6, "w2 population check");

  const SweepReport& rep = sweep_for(SettingId::Probit);
  const double kl_range = relative_range(rep.column_values("kl"));
  const double w2_range = relative_range(rep.column_values("w2"));
  const double ens_range = relative_range(rep.column_values("ensemble"));
  c.expect(kl_range < 0.15, "kl flat");
  c.expect(w2_range < 0.15, "w2 flat");
  c.expect(ens_range > 0.5, "ensemble varies");
  c.detail << "self kl/w2/otdd=" << kl_self << "/" << w2_self << "/" << otdd_self << " |w2-|m||="
           << std::abs(w2_pop - m.norm()) << " relative range kl=" << kl_range << " w2=" << w2_range
           << " ensemble=" << ens_range;
}

void criterion_9(Check& c) {
  EncoderConfig cfg;
  cfg.epochs = 40;
  cfg.step_size = 0.05;
  int same_ok = 0, flipped_ok = 0;
  for (int run = 0; run < 10; ++run) {
    const auto seed = static_cast<std::uint64_t>(100 + run);
    cfg.seed = seed;
    const SettingPair pair = make_setting_pair(SettingId::Lda, 1.0, seed);
    const Dataset tt = sample_dataset(pair.target, 200, derive_seed(seed, 1));
    const Dataset ttest = sample_dataset(pair.target, 400, derive_seed(seed, 2));
    const Dataset st = sample_dataset(pair.source, 200, derive_seed(seed, 3));
    const Dataset stest = sample_dataset(pair.source, 400, derive_seed(seed, 4));
    const EncHeadResult same = cls_enc_head(cfg, tt, ttest, st, stest);
    if (same.zone != Zone::NegativeTransfer) ++same_ok;

    auto flip = [](const Dataset& d) {
      Eigen::VectorXd y = d.labels();
      for (auto& v : y) v = 1.0 - v;
      return d.with_labels(y);
    };
    const EncHeadResult flipped = cls_enc_head(cfg, tt, ttest, flip(st), flip(stest));
    if (flipped.zone == Zone::NegativeTransfer) ++flipped_ok;
  }
  c.expect(same_ok >= 8, "identical source PT/AZ in >= 8/10");
  c.expect(flipped_ok >= 9, "flipped source NT in >= 9/10");

  // Gradient check on a small network.
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n01;
  Mlp enc(4, {6, 5}, 10);
  SoftmaxLayer head{Eigen::MatrixXd(2, 5), Eigen::VectorXd::Zero(2)};
  for (Eigen::Index i = 0; i < head.weight.size(); ++i) head.weight.data()[i] = 0.5 * n01(gen);
  Eigen::MatrixXd x(12, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(gen);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) y[i] = i % 2;
  Eigen::VectorXd grad;
  (void)joint_loss(enc, head, x, y, &grad);
  const Eigen::VectorXd theta = enc.parameters();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double h = 1e-6;
    Mlp up = enc, down = enc;
    Eigen::VectorXd tu = theta, td = theta;
    tu[j] += h;
    td[j] -= h;
    up.set_parameters(tu);
    down.set_parameters(td);
    const double fd = (joint_loss(up, head, x, y) - joint_loss(down, head, x, y)) / (2.0 * h);
    // Parameters of inactive ReLU units have zero gradient on both sides.
    const double scale = std::max(std::abs(fd), std::abs(grad[j]));
    if (scale < 1e-8) continue;
    worst = std::max(worst, std::abs(fd - grad[j]) / scale);
  }
  c.expect(worst <= 1e-4, "gradient check");
  c.detail << "identical PT/AZ " << same_ok << "/10, flipped NT " << flipped_ok << "/10, max rel grad err " << worst;
}

void criterion_10(Check& c) {
  // CLS symmetry and range.
  const SettingPair pair = make_setting_pair(SettingId::Probit, 0.4, 31);
  const Dataset t = sample_dataset(pair.target, 150, 32);
  const Dataset s = sample_dataset(pair.source, 150, 33);
  const auto models = parse_model_list("logreg,svm-linear,svm-rbf,gbt");
  const ClsEstimate ab = cls_unweighted_avg(models, t, s, LossKind::ZeroOne);
  const ClsEstimate ba = cls_unweighted_avg(models, s, t, LossKind::ZeroOne);
  c.expect(std::abs(ab.score - ba.score) <= 1e-15 && ab.e_t == ba.e_s, "CLS symmetry");

  bool in_range = true;
  for (SettingId id : {SettingId::Probit, SettingId::Lda, SettingId::Logistic, SettingId::FourClass}) {
    const SweepReport& rep = sweep_for(id);
    for (const auto& row : rep.values) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (rep.kinds[k] == ColumnKind::Metric) continue;
        in_range = in_range && row[k] >= 0.0 && row[k] <= 1.0;
      }
    }
  }
  c.expect(in_range, "0-1 loss scores in [0, 1]");

  // Softmax weights: simplex and lambda = 0 uniformity.
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  bool simplex = true, uniform = true;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> errs(1 + trial % 6);
    for (auto& e : errs) e = u(gen);
    const auto w = softmax_weights(errs, 500.0).weights;
    double total = 0.0;
    for (double v : w) {
      simplex = simplex && v >= 0.0;
      total += v;
    }
    simplex = simplex && std::abs(total - 1.0) <= 1e-12;
    for (double v : softmax_weights(errs, 0.0).weights) {
      uniform = uniform && std::abs(v - 1.0 / static_cast<double>(errs.size())) <= 1e-15;
    }
  }
  c.expect(simplex, "simplex weights");
  c.expect(uniform, "lambda = 0 uniform");

  // Fold partition.
  bool partition = true;
  for (int n = 10; n <= 200; n += 19) {
    const SettingPair lda = make_setting_pair(SettingId::Lda, 0.0, static_cast<std::uint64_t>(n));
    const Dataset d = sample_dataset(lda.target, static_cast<std::size_t>(n % 2 == 0 ? n : n + 1), 1);
    for (int k : {2, 5, 10}) {
      const FoldPlan plan = make_folds(d, k, static_cast<std::uint64_t>(k * n));
      std::vector<int> seen(d.rows(), 0);
      for (int f = 0; f < k; ++f) {
        for (auto i : plan.test_indices(f)) seen[i]++;
      }
      partition = partition && std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; });
      const auto sizes = plan.fold_sizes();
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      partition = partition && *hi - *lo <= 1;
    }
  }
  c.expect(partition, "fold partition");

  // Rotation exactness.
  double worst_cos = 0.0, worst_norm = 0.0;
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int p = 2 + trial % 19;
    const Eigen::VectorXd base = random_vector(gen, p);
    const double target = uc(gen);
    const Eigen::VectorXd r = rotate_to_cosine({base, target});
    worst_cos = std::max(worst_cos, std::abs(base.dot(r) / (base.norm() * r.norm()) - target));
    worst_norm = std::max(worst_norm, std::abs(r.norm() - base.norm()) / base.norm());
  }
  c.expect(worst_cos <= 1e-12 && worst_norm <= 1e-12, "rotation cosine and norm");

  // Byte-identical reports, also across worker counts.
  SweepConfig cfg;
  cfg.setting = SettingId::Mixture;
  cfg.grid = {0.0, 0.5, 1.0};
  cfg.replicates = 2;
  cfg.n = 100;
  cfg.seed = 99;
  cfg.threads = 1;
  const std::string first = sweep_csv(run_sweep(cfg)) + sweep_json(run_sweep(cfg));
  cfg.threads = 3;
  const std::string second = sweep_csv(run_sweep(cfg)) + sweep_json(run_sweep(cfg));
  c.expect(first == second, "deterministic reports");
  c.detail << "max rotation cos err " << worst_cos << ", norm err " << worst_norm;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t only = 0;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--replicates") {
      g_replicates = std::atoi(argv[i + 1]);
    } else if (flag == "--zone-replicates") {
      g_zone_replicates = std::atoi(argv[i + 1]);
    } else if (flag == "--only") {
      only = static_cast<std::size_t>(std::atoi(argv[i + 1]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--replicates N] [--zone-replicates N] [--only CRITERION]\n");
      return 1;
    }
  }

  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"closed-form oracles", criterion_1},
      {"Monte-Carlo oracle agrees with closed forms", criterion_2},
      {"probit sweep: ensemble Diff and rank correlation", criterion_3},
      {"lda sweep: ensemble Diff and exact oracle column", criterion_4},
      {"scheme ordering across settings", criterion_5},
      {"regression oracle at c = 1 equals the noise variance", criterion_6},
      {"probit transfer zones", criterion_7},
      {"baseline metric properties", criterion_8},
      {"encoder-head properties", criterion_9},
      {"invariant suite", criterion_10},
  };

  int failures = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && only != i + 1) continue;
    ++ran;
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail << " [exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += check.ok ? 0 : 1;
    std::printf("%s criterion %zu: %s (%.1fs) %s\n", check.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds, check.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
