#pragma once

// Stationarity diagnostics for preprocessed series: rolling moments,
// autocorrelation with a white-noise band, first differencing, and the
// KPSS level statistic with Bartlett long-run variance.

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wlgp/telemetry.hpp"

namespace wlgp {

// 5% critical value of the KPSS level-stationarity statistic; larger
// observed statistics reject stationarity at that level.
inline constexpr double kKpssLevelCritical5pct = 0.463;

struct RollingStats {
  int window = 0;
  std::vector<double> mean;      // entry i covers values[i .. i+window-1]
  std::vector<double> variance;  // unbiased, same alignment
};

inline RollingStats rolling_stats(const std::vector<double>& v,
                                  int window = 10) {
  if (window < 2) throw std::invalid_argument("rolling_stats: window < 2");
  if (static_cast<std::size_t>(window) > v.size()) {
    throw DataError("rolling_stats: series shorter than the window");
  }
  RollingStats out;
  out.window = window;
  const std::size_t count = v.size() - static_cast<std::size_t>(window) + 1;
  out.mean.reserve(count);
  out.variance.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double m = 0.0;
    for (int j = 0; j < window; ++j) m += v[i + j];
    m /= window;
    double s = 0.0;
    for (int j = 0; j < window; ++j) {
      const double d = v[i + j] - m;
      s += d * d;
    }
    out.mean.push_back(m);
    out.variance.push_back(s / (window - 1));
  }
  return out;
}

struct AcfResult {
  std::vector<double> values;  // lags 0 .. max_lag, values[0] = 1
  double band = 0.0;           // +-1.96/sqrt(n) white-noise band
};

// biased sample autocorrelation (1/n normalization at every lag)
inline AcfResult acf(const std::vector<double>& v, int max_lag) {
  const std::size_t n = v.size();
  if (n < 2) throw DataError("acf: need at least two points");
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= n) {
    throw std::invalid_argument("acf: max_lag out of range");
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double gamma0 = 0.0;
  for (double x : v) gamma0 += (x - mean) * (x - mean);
  gamma0 /= n;
  if (!(gamma0 > 0.0)) throw DataError("acf: constant series");
  AcfResult out;
  out.band = 1.959963984540054 / std::sqrt(static_cast<double>(n));
  out.values.reserve(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double g = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) {
      g += (v[t] - mean) * (v[t + k] - mean);
    }
    out.values.push_back(g / n / gamma0);
  }
  return out;
}

inline std::vector<double> difference(const std::vector<double>& v) {
  if (v.size() < 2) throw DataError("difference: need at least two points");
  std::vector<double> out(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) out[i] = v[i + 1] - v[i];
  return out;
}

struct KpssResult {
  double statistic = 0.0;
  int bandwidth = 0;
  bool stationary_at_5pct = false;
};

// KPSS level statistic: n^{-2} sum_t S_t^2 over the Bartlett long-run
// variance with bandwidth floor(4 (n/100)^{1/4}).
inline KpssResult kpss_level(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) throw DataError("kpss_level: need at least two points");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = v[i] - mean;
  double eta = 0.0, s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += e[i];
    eta += s * s;
  }
  eta /= static_cast<double>(n) * static_cast<double>(n);
  const int q = static_cast<int>(
      std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  auto gamma = [&](int j) {
    double g = 0.0;
    for (std::size_t t = 0; t + j < n; ++t) g += e[t] * e[t + j];
    return g / n;
  };
  double lr = gamma(0);
  for (int j = 1; j <= q; ++j) {
    lr += 2.0 * (1.0 - static_cast<double>(j) / (q + 1.0)) * gamma(j);
  }
  if (!(lr > 0.0)) throw DataError("kpss_level: degenerate long-run variance");
  KpssResult out;
  out.statistic = eta / lr;
  out.bandwidth = q;
  out.stationary_at_5pct = out.statistic <= kKpssLevelCritical5pct;
  return out;
}

struct DiagnosticsReport {
  RollingStats rolling;
  AcfResult acf_level;
  AcfResult acf_diff;
  KpssResult kpss_level_stat;
  KpssResult kpss_diff_stat;
};

inline DiagnosticsReport run_diagnostics(const std::vector<double>& v,
                                         int window = 10, int max_lag = 50) {
  DiagnosticsReport out;
  out.rolling = rolling_stats(v, window);
  const int lag_level =
      std::min<int>(max_lag, static_cast<int>(v.size()) - 1);
  out.acf_level = acf(v, lag_level);
  const std::vector<double> d = difference(v);
  const int lag_diff = std::min<int>(max_lag, static_cast<int>(d.size()) - 1);
  out.acf_diff = acf(d, lag_diff);
  out.kpss_level_stat = kpss_level(v);
  out.kpss_diff_stat = kpss_level(d);
  return out;
}

}  // namespace wlgp
