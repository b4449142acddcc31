// Command-line interface to the movement-model library: simulate paths,
// fit and compare covariance families on telemetry, predict held-out
// segments, and run stationarity diagnostics.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlgp/wlgp.hpp"

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes either to a named file or, for "-", to stdout.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw wlgp::DataError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void finish() {
    stream().flush();
    if (file_.is_open() && !file_) {
      throw wlgp::DataError("failed writing output file");
    }
  }

 private:
  std::ofstream file_;
};

// ----- model selection shared by simulate and predict -----

struct ModelFlags {
  std::string family;
  std::string model_file;
  std::string weight;
  double sigma = 1.0;
  double beta = 1.0;
  double alpha = 1.0;
  double exponent = 0.0;
  double hurst = 0.7;
  std::optional<double> singularity_exponent;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
  cmd->add_option("--model", mf.family,
                  "model family: weighted_log, weighted_log_exp, "
                  "weighted_log_const, weighted_log_poly, integrated_ou, "
                  "integrated_fou, fbm");
  cmd->add_option("--model-file", mf.model_file,
                  "JSON file with a fitted model (output of `fit`)");
  cmd->add_option("--weight", mf.weight,
                  "weight expression in u for --model weighted_log, e.g. "
                  "'exp(-0.5*u)'");
  cmd->add_option("--singularity-exponent", mf.singularity_exponent,
                  "power-law exponent of the weight at u = 0, in (-1, 0)");
  cmd->add_option("--sigma", mf.sigma, "scale parameter (default 1)");
  cmd->add_option("--beta", mf.beta, "mean-reversion rate (default 1)");
  cmd->add_option("--alpha", mf.alpha,
                  "amplitude of the constant weight (default 1)");
  cmd->add_option("--exponent", mf.exponent,
                  "exponent of the power weight, > -1 (default 0)");
  cmd->add_option("--hurst", mf.hurst, "Hurst index in (0, 1) (default 0.7)");
}

wlgp::KernelModel build_model(const ModelFlags& mf) {
  if (!mf.model_file.empty()) {
    std::ifstream in(mf.model_file);
    if (!in) throw wlgp::DataError("cannot open model file: " + mf.model_file);
    json doc = json::parse(in);
    return wlgp::model_from_json(doc.contains("model") ? doc["model"] : doc);
  }
  if (mf.family.empty()) {
    throw std::invalid_argument("give either --model or --model-file");
  }
  if (mf.family == "weighted_log") {
    if (mf.weight.empty()) {
      throw std::invalid_argument("--model weighted_log needs --weight");
    }
    return wlgp::WeightedLog{
        wlgp::make_weight(mf.weight, mf.singularity_exponent)};
  }
  if (mf.family == "weighted_log_exp") {
    return wlgp::WeightedLogExp{mf.sigma, mf.beta};
  }
  if (mf.family == "weighted_log_const") {
    return wlgp::WeightedLogConst{mf.alpha};
  }
  if (mf.family == "weighted_log_poly") {
    return wlgp::WeightedLogPoly{mf.exponent};
  }
  if (mf.family == "integrated_ou") {
    return wlgp::IntegratedOU{mf.sigma, mf.beta};
  }
  if (mf.family == "integrated_fou") {
    return wlgp::IntegratedFOU{mf.sigma, mf.beta, mf.hurst};
  }
  if (mf.family == "fbm") return wlgp::FBM{mf.sigma, mf.hurst};
  throw std::invalid_argument("unknown model family: " + mf.family);
}

// ----- telemetry pipeline shared by fit/compare/predict/diagnose -----

struct DataFlags {
  std::string path;
  std::string coordinate = "x";
  wlgp::CsvOptions csv;
  double bin_minutes = 0.5;
  double train_fraction = 1.0;
};

void add_data_flags(CLI::App* cmd, DataFlags& df, double default_fraction) {
  df.train_fraction = default_fraction;
  cmd->add_option("--data", df.path, "telemetry CSV file")->required();
  cmd->add_option("--coordinate", df.coordinate,
                  "which coordinate to model: x or y (default x)");
  cmd->add_option("--time-column", df.csv.time_column,
                  "timestamp column (default 'timestamp')");
  cmd->add_option("--x-column", df.csv.x_column,
                  "x coordinate column (default 'location-long')");
  cmd->add_option("--y-column", df.csv.y_column,
                  "y coordinate column (default 'location-lat')");
  cmd->add_option("--max-malformed-fraction", df.csv.max_malformed_fraction,
                  "tolerated fraction of malformed rows (default 0.01)");
  cmd->add_option("--bin-minutes", df.bin_minutes,
                  "averaging window in minutes, 0 disables binning "
                  "(default 0.5)");
  cmd->add_option("--train-fraction", df.train_fraction,
                  "chronological fraction used for fitting");
}

struct PreparedData {
  wlgp::TelemetrySeries train;
  wlgp::TelemetrySeries test;
  std::vector<std::string> warnings;
  std::size_t raw_rows = 0;
  std::size_t skipped_rows = 0;
  std::size_t averaged_duplicates = 0;
  std::size_t binned_points = 0;
};

PreparedData prepare_data(const DataFlags& df) {
  std::ifstream in(df.path);
  if (!in) throw wlgp::DataError("cannot open data file: " + df.path);
  wlgp::TelemetryData raw = wlgp::load_telemetry_csv(in, df.csv);
  if (df.coordinate != "x" && df.coordinate != "y") {
    throw std::invalid_argument("--coordinate must be x or y");
  }
  const std::vector<double>& values = df.coordinate == "x" ? raw.x : raw.y;
  wlgp::TelemetrySeries series =
      wlgp::minutes_series(raw.epoch_seconds, values);
  if (df.bin_minutes > 0.0) {
    series = wlgp::bin_average(series, df.bin_minutes);
  }
  PreparedData out;
  out.raw_rows = raw.epoch_seconds.size();
  out.skipped_rows = raw.skipped_rows;
  out.averaged_duplicates = raw.averaged_duplicates;
  out.binned_points = series.time_minutes.size();
  out.warnings = raw.warnings;
  auto [train, test] = wlgp::split_fraction(series, df.train_fraction);
  out.train = std::move(train);
  out.test = std::move(test);
  return out;
}

json preprocessing_json(const PreparedData& pd) {
  return json{{"rows", pd.raw_rows},
              {"skipped_rows", pd.skipped_rows},
              {"averaged_duplicates", pd.averaged_duplicates},
              {"binned_points", pd.binned_points},
              {"train_points", pd.train.value.size()},
              {"test_points", pd.test.value.size()}};
}

json fit_result_json(const wlgp::FitResult& r, bool include_profile) {
  json out{{"family", wlgp::to_string(r.family)},
           {"sigma_hat", r.sigma_hat},
           {"log_lik", r.log_lik},
           {"aic", r.aic},
           {"n_params", r.n_params},
           {"boundary_beta_zero", r.boundary_beta_zero},
           {"boundary_beta_max", r.boundary_beta_max},
           {"jitter", r.jitter},
           {"model", wlgp::model_to_json(r.model)}};
  if (r.beta_hat) out["beta_hat"] = *r.beta_hat;
  if (r.hurst_hat) out["hurst_hat"] = *r.hurst_hat;
  auto ci = [](const wlgp::ConfidenceInterval& c) {
    return json::array({c.lower, c.upper});
  };
  if (r.sigma_ci) out["sigma_ci"] = ci(*r.sigma_ci);
  if (r.beta_ci) out["beta_ci"] = ci(*r.beta_ci);
  if (r.hurst_ci) out["hurst_ci"] = ci(*r.hurst_ci);
  if (include_profile && !r.profile.empty()) {
    json prof = json::array();
    for (const auto& [b, ll] : r.profile) {
      prof.push_back(json::array({b, ll}));
    }
    out["profile"] = std::move(prof);
  }
  return out;
}

void emit_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ----- subcommand bodies -----

struct CommonFlags {
  std::string out = "-";
  int threads = 0;
  wlgp::QuadratureSpec quad;
};

void add_common_flags(CLI::App* cmd, CommonFlags& cf) {
  cmd->add_option("--out", cf.out, "output path, '-' for stdout (default)");
  cmd->add_option("--threads", cf.threads,
                  "worker threads; 0 uses LOGRANGE_GP_THREADS or all cores");
  cmd->add_option("--quad-rel", cf.quad.rel_tol,
                  "quadrature relative tolerance");
  cmd->add_option("--quad-abs", cf.quad.abs_tol,
                  "quadrature absolute tolerance");
}

int run_simulate(const ModelFlags& mf, const CommonFlags& cf, double horizon,
                 int n, int paths, std::uint64_t seed) {
  if (!(horizon > 0.0) || n < 1 || paths < 1) {
    throw std::invalid_argument("simulate: need horizon > 0, n >= 1, "
                                "paths >= 1");
  }
  wlgp::KernelModel model = build_model(mf);
  wlgp::TimeGrid grid = wlgp::uniform_grid(horizon, n);
  wlgp::SimulationResult sim =
      wlgp::simulate_paths(model, grid, paths, seed, cf.quad, cf.threads);
  OutputTarget out(cf.out);
  std::ostream& os = out.stream();
  os << "time";
  for (int p = 0; p < paths; ++p) os << ",path_" << p;
  os << "\n";
  for (int i = 0; i < n; ++i) {
    os << fmt17(grid.times[i]);
    for (int p = 0; p < paths; ++p) os << "," << fmt17(sim.paths(i, p));
    os << "\n";
  }
  out.finish();
  return 0;
}

wlgp::FitOptions make_fit_options(const CommonFlags& cf, double ci_level) {
  wlgp::FitOptions opt;
  opt.quad = cf.quad;
  opt.threads = cf.threads;
  opt.ci_level = ci_level;
  return opt;
}

int run_fit(const DataFlags& df, const CommonFlags& cf,
            const std::string& family, double ci_level) {
  PreparedData pd = prepare_data(df);
  emit_warnings(pd.warnings);
  wlgp::CenteredSeries c = wlgp::center_series(pd.train);
  wlgp::FitResult r = wlgp::fit_mle(wlgp::fit_family_from_string(family),
                                    c.grid, c.values,
                                    make_fit_options(cf, ci_level));
  json doc = fit_result_json(r, true);
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "fit";
  doc["ci_level"] = ci_level;
  doc["n_obs"] = c.values.size();
  doc["preprocessing"] = preprocessing_json(pd);
  OutputTarget out(cf.out);
  out.stream() << doc.dump(2) << "\n";
  out.finish();
  return 0;
}

int run_compare(const DataFlags& df, const CommonFlags& cf,
                const std::string& families_csv, double ci_level) {
  std::vector<wlgp::FitFamily> families;
  std::stringstream ss(families_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) families.push_back(wlgp::fit_family_from_string(tok));
  }
  PreparedData pd = prepare_data(df);
  emit_warnings(pd.warnings);
  wlgp::CenteredSeries c = wlgp::center_series(pd.train);
  wlgp::ModelComparison cmp = wlgp::compare_models(
      families, c.grid, c.values, make_fit_options(cf, ci_level));
  json results = json::array();
  const double best_aic = cmp.fits[cmp.best].aic;
  for (const auto& f : cmp.fits) {
    json row = fit_result_json(f, false);
    row["delta_aic"] = f.aic - best_aic;
    results.push_back(std::move(row));
  }
  std::sort(results.begin(), results.end(), [](const json& a, const json& b) {
    return a["aic"].get<double>() < b["aic"].get<double>();
  });
  json doc{{"schema_version", kSchemaVersion},
           {"command", "compare"},
           {"ci_level", ci_level},
           {"n_obs", c.values.size()},
           {"best_family", wlgp::to_string(cmp.fits[cmp.best].family)},
           {"results", std::move(results)},
           {"preprocessing", preprocessing_json(pd)}};
  OutputTarget out(cf.out);
  out.stream() << doc.dump(2) << "\n";
  out.finish();
  return 0;
}

int run_predict(const DataFlags& df, const ModelFlags& mf,
                const CommonFlags& cf, double level,
                const std::string& metrics_out) {
  wlgp::KernelModel model = build_model(mf);
  PreparedData pd = prepare_data(df);
  emit_warnings(pd.warnings);
  if (pd.test.value.empty()) {
    throw wlgp::DataError("predict: no held-out points; lower "
                          "--train-fraction");
  }
  wlgp::CenteredSeries c = wlgp::center_series(pd.train);
  // held-out points on the train clock and origin
  std::vector<double> test_times;
  Eigen::VectorXd test_values(
      static_cast<Eigen::Index>(pd.test.value.size()));
  for (std::size_t i = 0; i < pd.test.value.size(); ++i) {
    test_times.push_back(pd.test.time_minutes[i] - c.origin_time);
    test_values[static_cast<Eigen::Index>(i)] =
        pd.test.value[i] - c.origin_value;
  }
  wlgp::PredictionResult pr = wlgp::predict(model, c.grid.times, c.values,
                                            test_times, cf.quad, cf.threads);
  const double z = wlgp::inverse_normal_cdf(0.5 * (1.0 + level));
  OutputTarget out(cf.out);
  std::ostream& os = out.stream();
  os << "time,observed,mean,lower,upper\n";
  Eigen::VectorXd pred_raw(test_values.size());
  for (Eigen::Index i = 0; i < test_values.size(); ++i) {
    const double sd = std::sqrt(std::max(0.0, pr.cov(i, i)));
    const double mean_raw = pr.mean[i] + c.origin_value;
    pred_raw[i] = mean_raw;
    os << fmt17(pd.test.time_minutes[static_cast<std::size_t>(i)]) << ","
       << fmt17(pd.test.value[static_cast<std::size_t>(i)]) << ","
       << fmt17(mean_raw) << "," << fmt17(mean_raw - z * sd) << ","
       << fmt17(mean_raw + z * sd) << "\n";
  }
  out.finish();

  Eigen::VectorXd observed_raw(test_values.size());
  for (Eigen::Index i = 0; i < test_values.size(); ++i) {
    observed_raw[i] = pd.test.value[static_cast<std::size_t>(i)];
  }
  json metrics{{"schema_version", kSchemaVersion},
               {"command", "predict"},
               {"level", level},
               {"n_train", c.values.size()},
               {"n_test", test_values.size()},
               {"jitter", pr.jitter},
               {"relative_error",
                wlgp::relative_prediction_error(pred_raw, observed_raw)}};
  if (test_values.size() >= 2) {
    metrics["sd_normalized_error"] =
        wlgp::sd_normalized_prediction_error(pred_raw, observed_raw);
  }
  if (metrics_out.empty()) {
    std::cerr << metrics.dump(2) << "\n";
  } else {
    OutputTarget mo(metrics_out);
    mo.stream() << metrics.dump(2) << "\n";
    mo.finish();
  }
  return 0;
}

int run_diagnose(const DataFlags& df, const CommonFlags& cf, int window,
                 int max_lag, const std::string& csv_prefix) {
  PreparedData pd = prepare_data(df);
  emit_warnings(pd.warnings);
  const std::vector<double>& v = pd.train.value;
  wlgp::DiagnosticsReport rep = wlgp::run_diagnostics(v, window, max_lag);
  auto kpss_json = [](const wlgp::KpssResult& k) {
    return json{{"statistic", k.statistic},
                {"bandwidth", k.bandwidth},
                {"stationary_at_5pct", k.stationary_at_5pct},
                {"critical_5pct", wlgp::kKpssLevelCritical5pct}};
  };
  auto minmax = [](const std::vector<double>& x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return json::array({*lo, *hi});
  };
  json doc{{"schema_version", kSchemaVersion},
           {"command", "diagnose"},
           {"n_points", v.size()},
           {"window", rep.rolling.window},
           {"rolling_mean_range", minmax(rep.rolling.mean)},
           {"rolling_variance_range", minmax(rep.rolling.variance)},
           {"acf_band", rep.acf_level.band},
           {"acf_level", rep.acf_level.values},
           {"acf_difference", rep.acf_diff.values},
           {"kpss_level", kpss_json(rep.kpss_level_stat)},
           {"kpss_difference", kpss_json(rep.kpss_diff_stat)},
           {"preprocessing", preprocessing_json(pd)}};
  OutputTarget out(cf.out);
  out.stream() << doc.dump(2) << "\n";
  out.finish();

  if (!csv_prefix.empty()) {
    {
      OutputTarget ro(csv_prefix + "_rolling.csv");
      ro.stream() << "index,mean,variance\n";
      for (std::size_t i = 0; i < rep.rolling.mean.size(); ++i) {
        ro.stream() << i << "," << fmt17(rep.rolling.mean[i]) << ","
                    << fmt17(rep.rolling.variance[i]) << "\n";
      }
      ro.finish();
    }
    auto write_acf = [&](const std::string& name,
                         const wlgp::AcfResult& a) {
      OutputTarget ao(csv_prefix + "_" + name + ".csv");
      ao.stream() << "lag,acf,band\n";
      for (std::size_t k = 0; k < a.values.size(); ++k) {
        ao.stream() << k << "," << fmt17(a.values[k]) << "," << fmt17(a.band)
                    << "\n";
      }
      ao.finish();
    };
    write_acf("acf_level", rep.acf_level);
    write_acf("acf_diff", rep.acf_diff);
  }
  return 0;
}

// Expand --config FILE into option tokens inserted right after the
// subcommand, so explicitly typed flags override the file (every option
// takes the last occurrence).
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") config_path = args[i + 1];
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw wlgp::DataError("cannot open config file: " + config_path);
  json cfg = json::parse(in);
  if (!cfg.is_object()) throw wlgp::DataError("config must be a JSON object");
  std::vector<std::string> expanded;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) expanded.push_back("--" + key);
      continue;
    }
    expanded.push_back("--" + key);
    if (value.is_string()) {
      expanded.push_back(value.get<std::string>());
    } else {
      expanded.push_back(value.dump());
    }
  }
  // insert after the subcommand token (the first non-flag argument)
  auto pos = args.begin();
  while (pos != args.end() && !pos->empty() && (*pos)[0] == '-') ++pos;
  if (pos != args.end()) ++pos;
  args.insert(pos, expanded.begin(), expanded.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process movement models with weighted-log "
               "covariances"};
  app.require_subcommand(1);

  ModelFlags sim_model, pred_model;
  CommonFlags sim_cf, fit_cf, cmp_cf, pred_cf, diag_cf;
  DataFlags fit_df, cmp_df, pred_df, diag_df;
  std::string config_path;  // consumed by expand_config; registered so the
                            // parser accepts it
  double horizon = 120.0;
  int n_points = 400;
  int n_paths = 1;
  std::uint64_t seed = 1;
  std::string fit_family = "weighted_log_exp";
  std::string families = "weighted_log_exp,integrated_ou,fbm";
  double ci_level = 0.95;
  double pred_level = 0.95;
  std::string metrics_out;
  int window = 10;
  int max_lag = 50;
  std::string csv_prefix;

  auto* sim = app.add_subcommand("simulate", "sample paths on a regular grid");
  sim->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  add_model_flags(sim, sim_model);
  add_common_flags(sim, sim_cf);
  sim->add_option("--config", config_path, "JSON file of option defaults");
  sim->add_option("--horizon", horizon, "time horizon (default 120)");
  sim->add_option("--n", n_points, "grid points (default 400)");
  sim->add_option("--paths", n_paths, "number of paths (default 1)");
  sim->add_option("--seed", seed, "random seed (default 1)");

  auto* fit = app.add_subcommand("fit", "maximum-likelihood fit of one family");
  fit->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  add_data_flags(fit, fit_df, 1.0);
  add_common_flags(fit, fit_cf);
  fit->add_option("--config", config_path, "JSON file of option defaults");
  fit->add_option("--family", fit_family,
                  "weighted_log_exp, weighted_log_const, integrated_ou, "
                  "integrated_fou, or fbm (default weighted_log_exp)");
  fit->add_option("--ci-level", ci_level, "confidence level (default 0.95)");

  auto* cmp = app.add_subcommand("compare", "fit several families, rank by AIC");
  cmp->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  add_data_flags(cmp, cmp_df, 1.0);
  add_common_flags(cmp, cmp_cf);
  cmp->add_option("--config", config_path, "JSON file of option defaults");
  cmp->add_option("--families", families,
                  "comma-separated families (default "
                  "weighted_log_exp,integrated_ou,fbm)");
  cmp->add_option("--ci-level", ci_level, "confidence level (default 0.95)");

  auto* pred = app.add_subcommand("predict",
                                  "condition on the training part, predict "
                                  "the held-out part");
  pred->option_defaults()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  add_data_flags(pred, pred_df, 0.9);
  add_model_flags(pred, pred_model);
  add_common_flags(pred, pred_cf);
  pred->add_option("--config", config_path, "JSON file of option defaults");
  pred->add_option("--level", pred_level,
                   "prediction band level (default 0.95)");
  pred->add_option("--metrics-out", metrics_out,
                   "where to write the metrics JSON (default stderr)");

  auto* diag = app.add_subcommand("diagnose", "stationarity diagnostics");
  diag->option_defaults()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  add_data_flags(diag, diag_df, 1.0);
  add_common_flags(diag, diag_cf);
  diag->add_option("--config", config_path, "JSON file of option defaults");
  diag->add_option("--window", window, "rolling window (default 10)");
  diag->add_option("--max-lag", max_lag, "autocorrelation lags (default 50)");
  diag->add_option("--csv-prefix", csv_prefix,
                   "also write <prefix>_rolling.csv and ACF tables");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    // CLI11 parses reversed argv
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));

    if (sim->parsed()) {
      return run_simulate(sim_model, sim_cf, horizon, n_points, n_paths, seed);
    }
    if (fit->parsed()) return run_fit(fit_df, fit_cf, fit_family, ci_level);
    if (cmp->parsed()) return run_compare(cmp_df, cmp_cf, families, ci_level);
    if (pred->parsed()) {
      return run_predict(pred_df, pred_model, pred_cf, pred_level,
                         metrics_out);
    }
    if (diag->parsed()) {
      return run_diagnose(diag_df, diag_cf, window, max_lag, csv_prefix);
    }
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const wlgp::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const wlgp::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}
