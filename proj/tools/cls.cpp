// Command-line front end: dataset generation, CLS scoring, zones, oracles and sweeps.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cls/enchead.hpp"
#include "cls/error.hpp"
#include "cls/estimators.hpp"
#include "cls/harness.hpp"
#include "cls/rng.hpp"
#include "cls/synth.hpp"
#include "cls/zones.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kNumericError = 2;

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    cls::require(used == item.size() && !item.empty(), "cannot parse number '" + item + "'", cls::ErrorKind::Parse);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_words(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  cls::require(static_cast<bool>(out), "cannot open '" + path + "' for writing", cls::ErrorKind::Io);
  out << text;
}

struct ScoreArgs {
  std::string target, source, task = "binary", models, scheme = "ensemble", out;
  double lambda = 500.0, w = 0.5;
  int folds = 5;
  std::uint64_t seed = 0;
};

void add_score_flags(CLI::App* cmd, ScoreArgs& a) {
  cmd->add_option("--target", a.target, "Target CSV (label column last)")->required();
  cmd->add_option("--source", a.source, "Source CSV (label column last)")->required();
  cmd->add_option("--task", a.task, "binary, multiclass:K or regression")->capture_default_str();
  cmd->add_option("--models", a.models, "Comma-separated model ids (default: task library)");
  cmd->add_option("--scheme", a.scheme, "single, avg, wavg or ensemble")->capture_default_str();
  cmd->add_option("--lambda", a.lambda, "Softmax temperature on CV errors")->capture_default_str();
  cmd->add_option("--folds", a.folds, "Cross-validation folds")->capture_default_str();
  cmd->add_option("--w", a.w, "Asymmetric weight on e_t")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Seed for fold assignment")->capture_default_str();
  cmd->add_option("--out", a.out, "Write JSON here instead of stdout");
}

struct Scored {
  cls::Dataset target, source;
  std::vector<cls::ModelSpec> models;
  cls::Scheme scheme;
  cls::EstimatorOptions options;
  cls::DomainFit target_fit;
  cls::ClsEstimate estimate;
};

Scored run_score(const ScoreArgs& a, bool need_target_cv) {
  const cls::TaskKind task = cls::parse_task(a.task);
  cls::Dataset target = cls::load_csv(a.target, task);
  cls::Dataset source = cls::load_csv(a.source, task);
  std::vector<cls::ModelSpec> models = a.models.empty() ? cls::default_models(task) : cls::parse_model_list(a.models);
  for (auto& m : models) m = cls::resolve_for_task(m, task);
  const cls::Scheme scheme = cls::parse_scheme(a.scheme);
  cls::require(a.w > 0.0 && a.w < 1.0, "--w must lie strictly between 0 and 1");
  cls::EstimatorOptions opts{a.folds, a.lambda, a.seed, cls::default_loss(task)};
  const bool cv = need_target_cv || scheme == cls::Scheme::WeightedAvg || scheme == cls::Scheme::Ensemble;
  cls::EstimatorOptions topt = opts, sopt = opts;
  topt.seed = cls::derive_seed(a.seed, 0x7A);
  sopt.seed = cls::derive_seed(a.seed, 0x5C);
  cls::DomainFit tf = cls::fit_domain(models, target, topt, cv);
  const cls::DomainFit sf = cls::fit_domain(models, source, sopt,
                                            scheme == cls::Scheme::WeightedAvg || scheme == cls::Scheme::Ensemble);
  cls::ClsEstimate est = cls::cls_from_fits(scheme, tf, target, sf, source, opts);
  est.w = a.w;
  return {std::move(target), std::move(source), std::move(models), scheme, opts, std::move(tf), std::move(est)};
}

nlohmann::json score_json(const Scored& s, double w) {
  nlohmann::json j = nlohmann::json::parse(cls::to_json(s.estimate));
  j["cls_w"] = cls::cls_weighted_asymmetric(w, s.estimate.e_t, s.estimate.e_s);
  return j;
}

cls::SettingId setting_option(const std::string& name) { return cls::parse_setting(name); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-Learning Score: transferability estimates, zones and synthetic benchmarks"};
  app.require_subcommand(1);

  // gen
  std::string gen_setting = "probit", gen_target, gen_source, gen_spec;
  double gen_c = 1.0;
  int gen_n = 200, gen_p = 10;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "Write target and source CSVs for a synthetic setting");
  gen->add_option("--setting", gen_setting, "logistic, probit, lda, qda, mixture, fourclass, linreg, nonlinreg")
      ->capture_default_str();
  gen->add_option("--c", gen_c, "Cosine similarity (mixture weight alpha for mixture)")->capture_default_str();
  gen->add_option("--n", gen_n, "Rows per domain")->capture_default_str();
  gen->add_option("--p", gen_p, "Feature dimension")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Replicate seed")->capture_default_str();
  gen->add_option("--target", gen_target, "Target CSV path")->required();
  gen->add_option("--source", gen_source, "Source CSV path")->required();
  gen->add_option("--spec", gen_spec, "Also write both generator specs as JSON");

  // score / zone
  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "CLS between a target and a source CSV");
  add_score_flags(score, score_args);

  ScoreArgs zone_args;
  double gamma1 = 1.0, gamma2 = 5.0;
  auto* zone = app.add_subcommand("zone", "CLS, baseline thresholds and transfer-zone verdict");
  add_score_flags(zone, zone_args);
  zone->add_option("--gamma1", gamma1, "Lower threshold multiplier")->capture_default_str();
  zone->add_option("--gamma2", gamma2, "Upper threshold multiplier")->capture_default_str();

  // oracle
  std::string or_setting = "probit";
  double or_c = 1.0;
  int or_p = 10;
  std::size_t or_samples = 200000;
  std::uint64_t or_seed = 0;
  bool or_mc = false;
  auto* oracle = app.add_subcommand("oracle", "Oracle CLS of a synthetic setting");
  oracle->add_option("--setting", or_setting, "Setting id")->capture_default_str();
  oracle->add_option("--c", or_c, "Cosine similarity (alpha for mixture)")->capture_default_str();
  oracle->add_option("--p", or_p, "Feature dimension")->capture_default_str();
  oracle->add_option("--samples", or_samples, "Monte-Carlo samples per direction")->capture_default_str();
  oracle->add_option("--seed", or_seed, "Replicate seed")->capture_default_str();
  oracle->add_flag("--mc", or_mc, "Use Monte Carlo even when a closed form exists");

  // sweep
  cls::SweepConfig sweep_cfg;
  std::string sw_setting = "probit", sw_grid, sw_models, sw_extra, sw_schemes = "avg,wavg,ensemble",
              sw_metrics = "kl,w2,otdd", sw_out, sw_json;
  auto* sweep = app.add_subcommand("sweep", "Similarity sweep against the oracle");
  sweep->add_option("--setting", sw_setting, "Setting id")->capture_default_str();
  sweep->add_option("--grid", sw_grid, "Comma-separated similarity values (default: full grid)");
  sweep->add_option("--replicates", sweep_cfg.replicates, "Replicates per grid point")->capture_default_str();
  sweep->add_option("--n", sweep_cfg.n, "Rows per domain")->capture_default_str();
  sweep->add_option("--p", sweep_cfg.p, "Feature dimension")->capture_default_str();
  sweep->add_option("--models", sw_models, "Model library (comma-separated)");
  sweep->add_option("--extra-models", sw_extra, "Additional single-model columns");
  sweep->add_option("--schemes", sw_schemes, "Any of avg, wavg, ensemble")->capture_default_str();
  sweep->add_option("--metrics", sw_metrics, "Any of kl, w2, otdd")->capture_default_str();
  sweep->add_option("--folds", sweep_cfg.folds, "Cross-validation folds")->capture_default_str();
  sweep->add_option("--lambda", sweep_cfg.lambda, "Softmax temperature")->capture_default_str();
  sweep->add_option("--mc-samples", sweep_cfg.mc_samples, "Monte-Carlo oracle samples")->capture_default_str();
  sweep->add_option("--threads", sweep_cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sweep->add_option("--seed", sweep_cfg.seed, "Base seed")->capture_default_str();
  sweep->add_option("--out", sw_out, "CSV output path (default stdout)");
  sweep->add_option("--json", sw_json, "Also write the JSON report here");

  // zones-sweep
  cls::ZoneConfig zcfg;
  std::string zs_setting = "probit", zs_grid, zs_models, zs_methods = "naive,tradaboost", zs_out;
  auto* zsweep = app.add_subcommand("zones-sweep", "Zone verdicts against transfer outcomes over a similarity grid");
  zsweep->add_option("--setting", zs_setting, "Setting id")->capture_default_str();
  zsweep->add_option("--grid", zs_grid, "Comma-separated similarity values");
  zsweep->add_option("--replicates", zcfg.replicates, "Replicates per grid point")->capture_default_str();
  zsweep->add_option("--n-target", zcfg.n_target, "Target rows drawn per replicate")->capture_default_str();
  zsweep->add_option("--n-source", zcfg.n_source, "Source rows per replicate")->capture_default_str();
  zsweep->add_option("--train-per-class", zcfg.train_per_class, "Target training rows per class")
      ->capture_default_str();
  zsweep->add_option("--models", zs_models, "Model library for the ensemble CLS");
  zsweep->add_option("--methods", zs_methods, "Transfer methods: naive, tradaboost")->capture_default_str();
  zsweep->add_option("--rounds", zcfg.tradaboost_rounds, "TrAdaBoost rounds")->capture_default_str();
  zsweep->add_option("--gamma1", zcfg.gamma1, "Lower threshold multiplier")->capture_default_str();
  zsweep->add_option("--gamma2", zcfg.gamma2, "Upper threshold multiplier")->capture_default_str();
  zsweep->add_option("--threads", zcfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  zsweep->add_option("--seed", zcfg.seed, "Base seed")->capture_default_str();
  zsweep->add_option("--out", zs_out, "CSV output path (default stdout)");

  // enchead
  cls::EncoderConfig ecfg;
  std::string eh_tt, eh_ttest, eh_st, eh_stest, eh_task = "binary", eh_widths = "32,16";
  double eh_g1 = 1.0, eh_g2 = 5.0;
  auto* enchead = app.add_subcommand("enchead", "Encoder-head CLS from pre-split target and source CSVs");
  enchead->add_option("--target-train", eh_tt, "Target training CSV")->required();
  enchead->add_option("--target-test", eh_ttest, "Target test CSV")->required();
  enchead->add_option("--source-train", eh_st, "Source training CSV")->required();
  enchead->add_option("--source-test", eh_stest, "Source test CSV")->required();
  enchead->add_option("--task", eh_task, "binary or multiclass:K")->capture_default_str();
  enchead->add_option("--widths", eh_widths, "Hidden layer widths")->capture_default_str();
  enchead->add_option("--epochs", ecfg.epochs, "Training epochs")->capture_default_str();
  enchead->add_option("--step", ecfg.step_size, "Gradient step size")->capture_default_str();
  enchead->add_option("--batch", ecfg.batch_size, "Mini-batch size")->capture_default_str();
  enchead->add_option("--seed", ecfg.seed, "Initialization and shuffling seed")->capture_default_str();
  enchead->add_option("--gamma1", eh_g1, "Lower threshold multiplier")->capture_default_str();
  enchead->add_option("--gamma2", eh_g2, "Upper threshold multiplier")->capture_default_str();

  // report
  std::string rp_in;
  int rp_digits = 4;
  auto* report = app.add_subcommand("report", "Render a CSV report as an aligned text table");
  report->add_option("input", rp_in, "CSV file")->required();
  report->add_option("--digits", rp_digits, "Decimals shown")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*gen) {
      const cls::SettingPair pair = cls::make_setting_pair(setting_option(gen_setting), gen_c, gen_seed, gen_p);
      cls::require(gen_n >= 2, "--n must be >= 2");
      const auto n = static_cast<std::size_t>(gen_n);
      cls::save_csv(cls::sample_dataset(pair.target, n, cls::derive_seed(gen_seed, 0xD0)), gen_target);
      cls::save_csv(cls::sample_dataset(pair.source, n, cls::derive_seed(gen_seed, 0xD1)), gen_source);
      if (!gen_spec.empty()) {
        nlohmann::json j;
        j["target"] = nlohmann::json::parse(cls::to_json(pair.target));
        j["source"] = nlohmann::json::parse(cls::to_json(pair.source));
        write_output(j.dump(2) + "\n", gen_spec);
      }
    } else if (*score) {
      const Scored s = run_score(score_args, false);
      write_output(score_json(s, score_args.w).dump(2) + "\n", score_args.out);
    } else if (*zone) {
      const Scored s = run_score(zone_args, true);
      cls::EstimatorOptions topt = s.options;
      topt.seed = cls::derive_seed(zone_args.seed, 0x7A);
      const cls::BaselineError base = cls::baseline_from_fit(s.target_fit, s.scheme, s.target, topt);
      const cls::ZoneThresholds t = cls::thresholds(base.e0, base.se, gamma1, gamma2);
      nlohmann::json j = score_json(s, zone_args.w);
      j["e0"] = base.e0;
      j["se_e0"] = base.se;
      j["gamma1"] = t.gamma1;
      j["gamma2"] = t.gamma2;
      j["tau1"] = t.tau1;
      j["tau2"] = t.tau2;
      j["zone"] = std::string(cls::zone_label(cls::classify(s.estimate.score, t)));
      write_output(j.dump(2) + "\n", zone_args.out);
    } else if (*oracle) {
      const cls::SettingPair pair = cls::make_setting_pair(setting_option(or_setting), or_c, or_seed, or_p);
      nlohmann::json j;
      j["setting"] = or_setting;
      j["similarity"] = or_c;
      const auto closed = cls::oracle_closed_form(pair.target, pair.source);
      if (closed && !or_mc) {
        j["method"] = "closed-form";
        j["cls"] = *closed;
      } else {
        const cls::ClsEstimate mc = cls::oracle_monte_carlo(cls::OracleModel(pair.target), cls::OracleModel(pair.source),
                                                            or_samples, or_seed);
        j["method"] = "monte-carlo";
        j["cls"] = mc.score;
        j["e_t"] = mc.e_t;
        j["e_s"] = mc.e_s;
        j["mc_se"] = mc.mc_se;
        j["samples"] = or_samples;
        if (closed) j["closed_form"] = *closed;
      }
      std::cout << j.dump(2) << "\n";
    } else if (*sweep) {
      sweep_cfg.setting = setting_option(sw_setting);
      if (!sw_grid.empty()) sweep_cfg.grid = parse_doubles(sw_grid);
      if (!sw_models.empty()) sweep_cfg.models = cls::parse_model_list(sw_models);
      if (!sw_extra.empty()) sweep_cfg.extra_models = cls::parse_model_list(sw_extra);
      sweep_cfg.schemes.clear();
      for (const auto& s : parse_words(sw_schemes)) sweep_cfg.schemes.push_back(cls::parse_scheme(s));
      sweep_cfg.metrics = parse_words(sw_metrics);
      const cls::SweepReport rep = cls::run_sweep(sweep_cfg);
      write_output(cls::sweep_csv(rep), sw_out);
      if (!sw_json.empty()) write_output(cls::sweep_json(rep) + "\n", sw_json);
      for (const auto& msg : rep.failure_messages) std::cerr << "warning: " << msg << "\n";
    } else if (*zsweep) {
      zcfg.setting = setting_option(zs_setting);
      if (!zs_grid.empty()) zcfg.grid = parse_doubles(zs_grid);
      if (!zs_models.empty()) zcfg.models = cls::parse_model_list(zs_models);
      zcfg.methods = parse_words(zs_methods);
      write_output(cls::zone_csv(cls::run_zone_experiment(zcfg)), zs_out);
    } else if (*enchead) {
      const cls::TaskKind task = cls::parse_task(eh_task);
      ecfg.widths.clear();
      for (double w : parse_doubles(eh_widths)) ecfg.widths.push_back(static_cast<int>(w));
      const cls::EncHeadResult r =
          cls::cls_enc_head(ecfg, cls::load_csv(eh_tt, task), cls::load_csv(eh_ttest, task), cls::load_csv(eh_st, task),
                            cls::load_csv(eh_stest, task), eh_g1, eh_g2);
      nlohmann::json j;
      j["cls"] = r.cls;
      j["e_t"] = r.e_t;
      j["e_s"] = r.e_s;
      j["e0"] = r.e0;
      j["se_e0"] = r.se_e0;
      j["tau1"] = r.thresholds.tau1;
      j["tau2"] = r.thresholds.tau2;
      j["zone"] = std::string(cls::zone_label(r.zone));
      j["final_loss"] = r.epoch_losses.back();
      j["seed"] = ecfg.seed;
      std::cout << j.dump(2) << "\n";
    } else if (*report) {
      std::ifstream in(rp_in, std::ios::binary);
      cls::require(static_cast<bool>(in), "cannot open '" + rp_in + "'", cls::ErrorKind::Io);
      std::stringstream buf;
      buf << in.rdbuf();
      std::cout << cls::render_table(buf.str(), rp_digits);
    }
  } catch (const cls::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == cls::ErrorKind::Numeric ? kNumericError : kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
  return 0;
}
