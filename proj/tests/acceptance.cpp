// Acceptance suite: one line per criterion, [PASS]/[FAIL]/[SKIP], exit
// code equal to the number of failures.  Criteria 8-10 share one set of
// seeded replicate studies.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "wlgp/wlgp.hpp"

using namespace wlgp;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++failures;
}

void report_skip(int criterion, const std::string& detail) {
  std::printf("[SKIP] criterion %2d: %s\n", criterion, detail.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const std::vector<double> kTimes = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0};

// ---- criterion 1: quadrature vs closed form for f = 1 ----
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  KernelModel quad_model{WeightedLogPoly{0.0}};
  KernelModel closed{WeightedLogConst{1.0}};
  double worst = 0.0;
  for (double s : kTimes) {
    for (double t : kTimes) {
      const double a = cov(quad_model, s, t);
      const double b = cov(closed, s, t);
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
  }
  const double el = seconds_since(t0);
  report(1, worst <= 1e-8 && el < 1.0,
         "f=1 quadrature vs closed form on 36 pairs: max rel err " +
             fmt(worst) + ", " + fmt(el) + " s");
}

// ---- criterion 2: diagonal identity ----
void criterion_2() {
  struct Case {
    KernelModel model;
    std::function<double(double)> f;
    std::optional<double> hint;
    const char* name;
  };
  std::vector<Case> cases;
  cases.push_back({KernelModel{WeightedLog{make_weight("u^(-0.5)", -0.5)}},
                   [](double u) { return std::pow(u, -0.5); }, -0.5,
                   "u^-0.5"});
  cases.push_back({KernelModel{WeightedLog{make_weight("1")}},
                   [](double) { return 1.0; }, std::nullopt, "1"});
  cases.push_back({KernelModel{WeightedLog{make_weight("u")}},
                   [](double u) { return u; }, std::nullopt, "u"});
  cases.push_back({KernelModel{WeightedLog{make_weight("exp(-0.8*u)")}},
                   [](double u) { return std::exp(-0.8 * u); }, std::nullopt,
                   "exp(-0.8u)"});
  double worst = 0.0;
  std::string worst_case;
  for (const auto& c : cases) {
    for (double t : kTimes) {
      auto oracle = integrate([&](double u) { return c.f(u) * (t - u); }, 0.0,
                              t, {}, c.hint);
      const double expected = 4.0 * std::log(2.0) * oracle.value;
      const double got = cov(c.model, t, t);
      const double rel = std::abs(got - expected) / std::abs(expected);
      if (rel > worst) {
        worst = rel;
        worst_case = std::string(c.name) + " t=" + fmt(t);
      }
    }
  }
  report(2, worst <= 1e-8,
         "diagonal identity over 4 weights x 6 times: max rel err " +
             fmt(worst) + " (" + worst_case + ")");
}

// ---- criterion 3: positive definiteness of every bundled model ----
void criterion_3() {
  struct Entry {
    KernelModel model;
    const char* name;
    double budget_s;
    QuadratureSpec spec;
  };
  QuadratureSpec fou_spec;
  fou_spec.rel_tol = 1e-8;
  fou_spec.abs_tol = 1e-10;
  std::vector<Entry> entries = {
      {KernelModel{WeightedLog{make_weight("exp(-0.8*u)")}}, "weighted_log",
       30.0, {}},
      {KernelModel{WeightedLogExp{1.7, 0.044}}, "weighted_log_exp", 30.0, {}},
      {KernelModel{WeightedLogConst{1.0}}, "weighted_log_const", 30.0, {}},
      {KernelModel{WeightedLogPoly{-0.5}}, "weighted_log_poly", 30.0, {}},
      {KernelModel{IntegratedOU{1.0, 1.0}}, "integrated_ou", 30.0, {}},
      {KernelModel{FBM{1.0, 0.7}}, "fbm", 30.0, {}},
      {KernelModel{IntegratedFOU{1.0, 1.0, 0.7}}, "integrated_fou", 600.0,
       fou_spec},
  };
  TimeGrid grid = uniform_grid(120.0, 400);
  bool all_ok = true;
  std::string detail = "400-pt grids:";
  for (const auto& e : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    double jit = 0.0, rel_jit = 0.0;
    try {
      Eigen::MatrixXd k = build_cov_matrix(e.model, grid, e.spec);
      CholeskyFactor f = cholesky_with_jitter(k);
      jit = f.jitter;
      rel_jit = jit / k.diagonal().mean();
      ok = rel_jit <= 1e-8;
    } catch (const std::exception&) {
      ok = false;
    }
    const double el = seconds_since(t0);
    ok = ok && el < e.budget_s;
    all_ok = all_ok && ok;
    detail += std::string(" ") + e.name + "(jitter/diag " + fmt(rel_jit) +
              ", " + fmt(el) + "s)";
  }
  report(3, all_ok, detail);
}

// ---- criterion 4: self-similarity of the power family ----
void criterion_4() {
  const std::vector<std::pair<double, double>> pairs = {
      {1.0, 1.0}, {1.0, 2.0}, {3.0, 7.0}};
  double worst = 0.0;
  for (double a : {-0.5, 0.0, 1.0, 10.6}) {
    KernelModel m{WeightedLogPoly{a}};
    for (double c : {0.5, 2.0, 7.0}) {
      for (auto [s, t] : pairs) {
        const double lhs = cov(m, c * s, c * t);
        const double rhs = std::pow(c, a + 2.0) * cov(m, s, t);
        worst = std::max(worst, std::abs(lhs / rhs - 1.0));
      }
    }
  }
  report(4, worst <= 1e-8,
         "self-similarity over 4 exponents x 3 scales x 3 pairs: max rel "
         "dev " + fmt(worst));
}

// ---- criterion 5: logarithmic growth coefficient ----
void criterion_5() {
  const double T = 1e4;
  KernelModel m{WeightedLogConst{1.0}};
  const double ratio =
      (cov(m, 1.0, 10.0 * T) - cov(m, 1.0, T)) / std::log(10.0);
  const double dev = std::abs(ratio - 1.0);
  report(5, dev <= 0.01,
         "[K(1,1e5)-K(1,1e4)]/log10 = " + fmt(ratio) + ", |dev| " + fmt(dev));
}

// ---- criterion 6: long-range dependence limit ----
void criterion_6() {
  const double T = 1e6;
  const double bracket =
      T * const_increment_cross_cov(1.0, 1.0, 2.0, 0.5 + T, 1.0 + T);
  const double limit =
      lrd_limit(KernelModel{WeightedLogPoly{0.0}}, 2.0, 1.0, 1.0, 0.5);
  const double dev = std::abs(bracket - limit) / limit;
  report(6, dev <= 0.01,
         "T*cross-increment bracket " + fmt(bracket) + " vs limit " +
             fmt(limit) + ", rel dev " + fmt(dev));
}

// ---- criterion 7: quadratic variation decay ----
void criterion_7() {
  KernelModel m{WeightedLogConst{1.0}};
  auto big_s = [&](int n) {
    double s = 0.0;
    for (int i = 1; i <= n; ++i) {
      s += increment_second_moment(m, (i - 1) / double(n), i / double(n));
    }
    return s;
  };
  bool ok = true;
  std::string detail = "S(2n)/S(n):";
  for (int n : {512, 1024}) {
    const double ratio = big_s(2 * n) / big_s(n);
    ok = ok && ratio >= 0.5 && ratio <= 0.65;
    detail += " n=" + std::to_string(n) + " -> " + fmt(ratio);
  }
  report(7, ok, detail);
}

// ---- criteria 8-10: shared replicate studies ----
struct ReplicateStudy {
  int cover_count = 0;        // replicates with both true params in the CIs
  double max_fit_seconds = 0.0;
  std::vector<double> errors;  // per-replicate held-out error metric
  int exp_pref_on_exp = 0;     // AIC prefers the generating family
  int ou_pref_on_ou = 0;
  int replicates = 0;
};

ReplicateStudy run_replicates() {
  ReplicateStudy st;
  const double sigma_true = 1.7, beta_true = 0.044;
  const KernelModel exp_truth{WeightedLogExp{sigma_true, beta_true}};
  const KernelModel ou_truth{IntegratedOU{sigma_true, beta_true}};
  TimeGrid grid = uniform_grid(120.0, 400);
  const int n_train = 360;  // 90% prefix
  TimeGrid train_grid{{grid.times.begin(), grid.times.begin() + n_train}};
  std::vector<double> test_times(grid.times.begin() + n_train,
                                 grid.times.end());
  const int reps = 20;
  st.replicates = reps;

  Eigen::MatrixXd k_exp = build_cov_matrix(exp_truth, grid);
  CholeskyFactor f_exp = cholesky_with_jitter(k_exp);
  Eigen::MatrixXd k_ou = build_cov_matrix(ou_truth, grid);
  CholeskyFactor f_ou = cholesky_with_jitter(k_ou);

  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(rep);
    Eigen::MatrixXd path = sample_gaussian(f_exp, 1, seed);
    Eigen::VectorXd train = path.col(0).head(n_train);
    Eigen::VectorXd held = path.col(0).tail(400 - n_train);

    const auto t0 = std::chrono::steady_clock::now();
    FitResult fit = fit_mle(FitFamily::weighted_log_exp, train_grid, train);
    st.max_fit_seconds = std::max(st.max_fit_seconds, seconds_since(t0));

    const bool sigma_in = fit.sigma_ci && fit.sigma_ci->lower <= sigma_true &&
                          sigma_true <= fit.sigma_ci->upper;
    const bool beta_in = fit.beta_ci && fit.beta_ci->lower <= beta_true &&
                         beta_true <= fit.beta_ci->upper;
    if (sigma_in && beta_in) ++st.cover_count;

    // held-out prediction with the fitted model
    PredictionResult pr =
        predict(fit.model, train_grid.times, train, test_times);
    st.errors.push_back(relative_prediction_error(pr.mean, held));

    // model selection on the same replicate
    FitResult ou_fit = fit_mle(FitFamily::integrated_ou, train_grid, train);
    if (fit.aic < ou_fit.aic) ++st.exp_pref_on_exp;

    // the converse study: data generated by the integrated OU model
    Eigen::MatrixXd ou_path = sample_gaussian(f_ou, 1, seed + 500);
    Eigen::VectorXd ou_train = ou_path.col(0).head(n_train);
    FitResult ou_on_ou =
        fit_mle(FitFamily::integrated_ou, train_grid, ou_train);
    FitResult exp_on_ou =
        fit_mle(FitFamily::weighted_log_exp, train_grid, ou_train);
    if (ou_on_ou.aic < exp_on_ou.aic) ++st.ou_pref_on_ou;
  }
  return st;
}

void criterion_8(const ReplicateStudy& st) {
  report(8,
         st.cover_count >= 17 && st.max_fit_seconds <= 60.0,
         "true (sigma, beta) inside 95% GA CIs in " +
             std::to_string(st.cover_count) + "/20 replicates, slowest fit " +
             fmt(st.max_fit_seconds) + " s");
}

void criterion_9(const ReplicateStudy& st) {
  std::vector<double> e = st.errors;
  std::sort(e.begin(), e.end());
  const double median = 0.5 * (e[9] + e[10]);
  report(9, median <= 0.05,
         "median held-out mean relative error " + fmt(median) +
             " over 20 replicates (range " + fmt(e.front()) + " .. " +
             fmt(e.back()) + ")");
}

void criterion_10(const ReplicateStudy& st) {
  report(10, st.exp_pref_on_exp >= 18 && st.ou_pref_on_ou >= 18,
         "AIC picks the generating family: " +
             std::to_string(st.exp_pref_on_exp) +
             "/20 on weighted-log-exp data, " +
             std::to_string(st.ou_pref_on_ou) + "/20 on integrated-OU data");
}

// ---- criterion 11: fractional OU at H = 1/2 ----
void criterion_11() {
  QuadratureSpec spec;
  spec.rel_tol = 1e-9;
  KernelModel fou{IntegratedFOU{1.0, 1.0, 0.5}};
  KernelModel ou{IntegratedOU{1.0, 1.0}};
  double worst = 0.0;
  for (int i = 1; i <= 10; ++i) {
    for (int j = i; j <= 10; ++j) {
      const double a = cov(fou, double(i), double(j), spec);
      const double b = cov(ou, double(i), double(j));
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
  }
  report(11, worst <= 1e-7,
         "H=1/2 2-D quadrature vs analytic OU on 10x10 grid: max rel err " +
             fmt(worst));
}

// ---- criterion 12: real-data model ordering (conditional) ----
void criterion_12() {
  std::string path;
  if (const char* env = std::getenv("WLGP_BAT_CSV")) path = env;
  if (path.empty()) {
    for (const char* candidate : {"data/bat4.csv", "tests/data/bat4.csv",
                                  "../data/bat4.csv"}) {
      std::ifstream probe(candidate);
      if (probe) {
        path = candidate;
        break;
      }
    }
  }
  if (path.empty()) {
    report_skip(12,
                "telemetry dataset not present (set WLGP_BAT_CSV or place "
                "data/bat4.csv)");
    return;
  }
  try {
    std::ifstream in(path);
    TelemetryData raw = load_telemetry_csv(in);
    TelemetrySeries lat = minutes_series(raw.epoch_seconds, raw.y);
    TelemetrySeries binned = bin_average(lat, 0.5);
    CenteredSeries c = center_series(binned);
    auto cmp = compare_models({FitFamily::weighted_log_exp,
                               FitFamily::integrated_ou, FitFamily::fbm},
                              c.grid, c.values);
    const double aic_exp = cmp.fits[0].aic;
    const double aic_ou = cmp.fits[1].aic;
    const double aic_fbm = cmp.fits[2].aic;
    const double beta = cmp.fits[0].beta_hat.value_or(0.0);
    const bool order_ok = aic_exp < aic_ou && aic_ou < aic_fbm;
    const bool beta_ok = beta >= 0.5 * 0.01204 && beta <= 1.5 * 0.01204;
    report(12, order_ok && beta_ok,
           "AIC exp/ou/fbm = " + fmt(aic_exp) + "/" + fmt(aic_ou) + "/" +
               fmt(aic_fbm) + ", beta_hat " + fmt(beta) +
               " (target 0.01204 +-50%)");
  } catch (const std::exception& e) {
    report(12, false, std::string("dataset processing failed: ") + e.what());
  }
}

// ---- criterion 13: small-time variance constant ----
void criterion_13() {
  bool ok = true;
  std::string detail = "Var(zeta_eps)/eps^(a+2):";
  for (double a : {-0.5, 0.0, 1.0}) {
    KernelModel m{WeightedLogPoly{a}};
    const double eps = 1e-3;
    const double measured = variance(m, eps) / std::pow(eps, a + 2.0);
    const double derived = 4.0 * std::log(2.0) / ((a + 1.0) * (a + 2.0));
    const double alt = 2.0 / ((a + 1.0) * (a + 2.0));
    const double dev = std::abs(measured / derived - 1.0);
    ok = ok && dev <= 0.01;
    detail += " a=" + fmt(a) + ": measured " + fmt(measured) +
              ", 4log2-based " + fmt(derived) + " (rel dev " + fmt(dev) +
              "), published-constant 2-based " + fmt(alt) + " deviates by x" +
              fmt(measured / alt);
  }
  report(13, ok, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  const ReplicateStudy st = run_replicates();
  criterion_8(st);
  criterion_9(st);
  criterion_10(st);
  criterion_11();
  criterion_12();
  criterion_13();
  std::printf("%d criteria failed\n", failures);
  return failures;
}
