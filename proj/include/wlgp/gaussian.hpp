#pragma once

// Dense Gaussian linear algebra on top of the covariance models: Cholesky
// factorization with a bounded jitter ladder, exact log-likelihood,
// conditional distributions, and reproducible path sampling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "wlgp/kernels.hpp"

namespace wlgp {

// Failure of a numerical routine that input validation cannot rule out in
// advance, e.g. a covariance matrix that stays indefinite after the full
// jitter ladder.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lower-triangular factor of K + jitter*I.  jitter records the smallest
// ladder rung that made the factorization succeed, never more than
// max_rel_jitter times the mean diagonal.
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
  double log_det = 0.0;

  Eigen::Index size() const { return lower.rows(); }

  Eigen::VectorXd solve(Eigen::VectorXd v) const {
    lower.triangularView<Eigen::Lower>().solveInPlace(v);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(v);
    return v;
  }

  Eigen::MatrixXd solve(Eigen::MatrixXd m) const {
    lower.triangularView<Eigen::Lower>().solveInPlace(m);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(m);
    return m;
  }
};

inline CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& k,
                                           double max_rel_jitter = 1e-6) {
  if (k.rows() != k.cols()) {
    throw std::invalid_argument("cholesky_with_jitter: matrix must be square");
  }
  if (!k.allFinite()) {
    throw NumericalError("cholesky_with_jitter: non-finite matrix entries");
  }
  const double dbar = k.rows() == 0 ? 1.0 : k.diagonal().mean();
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd work = k;
    if (jitter > 0.0) work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      CholeskyFactor f;
      f.lower = llt.matrixL();
      f.jitter = jitter;
      f.log_det = 2.0 * f.lower.diagonal().array().log().sum();
      return f;
    }
    jitter = jitter == 0.0 ? 1e-12 * dbar : jitter * 10.0;
    if (!(jitter > 0.0) || jitter > max_rel_jitter * dbar * 1.01) {
      throw NumericalError(
          "cholesky_with_jitter: matrix not positive definite within the "
          "jitter ladder");
    }
  }
}

// Exact Gaussian log density of x under N(0, K) using the factor of K.
inline double log_likelihood(const CholeskyFactor& f, const Eigen::VectorXd& x) {
  if (x.size() != f.size()) {
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  }
  Eigen::VectorXd half = x;
  f.lower.triangularView<Eigen::Lower>().solveInPlace(half);
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + f.log_det +
                 half.squaredNorm());
}

struct ConditionalDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Distribution of the prediction block given observations: mean
// K21 K11^{-1} x and covariance K22 - K21 K11^{-1} K12.  cross is the
// n_obs x n_pred block K12.  The result is symmetrized and its diagonal
// clamped at zero to absorb roundoff.
inline ConditionalDistribution condition(const CholeskyFactor& obs_factor,
                                         const Eigen::MatrixXd& cross,
                                         const Eigen::MatrixXd& pred_cov,
                                         const Eigen::VectorXd& obs) {
  if (cross.rows() != obs_factor.size() || obs.size() != obs_factor.size() ||
      cross.cols() != pred_cov.rows() || pred_cov.rows() != pred_cov.cols()) {
    throw std::invalid_argument("condition: block dimension mismatch");
  }
  ConditionalDistribution out;
  if (obs_factor.size() == 0) {
    out.mean = Eigen::VectorXd::Zero(pred_cov.rows());
    out.cov = pred_cov;
    return out;
  }
  Eigen::MatrixXd m = obs_factor.solve(cross);  // K11^{-1} K12
  out.mean = m.transpose() * obs;
  Eigen::MatrixXd c = pred_cov - cross.transpose() * m;
  out.cov = 0.5 * (c + c.transpose());
  out.cov.diagonal() = out.cov.diagonal().cwiseMax(0.0);
  return out;
}

// Standard normal quantile: rational approximation refined by one Halley
// step against erfc, accurate to a few ulps over the full open interval.
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("inverse_normal_cdf: p must lie in (0,1)");
  }
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  if (std::abs(x) < 36.0) {  // past that, exp(x^2/2) would overflow
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u =
        e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace gdetail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One standard normal draw addressed by (seed, path, element).  The value
// is a pure function of the address, so results cannot depend on how
// paths are scheduled over threads.
inline double standard_normal(std::uint64_t seed, std::uint64_t path,
                              std::uint64_t elem) {
  const std::uint64_t h = mix64(mix64(mix64(seed) ^ path) ^ elem);
  const double u = (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
  return inverse_normal_cdf(u);
}

}  // namespace gdetail

// n x paths matrix of draws from N(0, L L^T), column p reproducible from
// (seed, p) alone.
inline Eigen::MatrixXd sample_gaussian(const CholeskyFactor& f, int paths,
                                       std::uint64_t seed, int threads = 0) {
  if (paths < 0) throw std::invalid_argument("sample_gaussian: paths < 0");
  const Eigen::Index n = f.size();
  Eigen::MatrixXd out(n, paths);
  if (paths == 0 || n == 0) return out;
  const int workers = std::max(1, std::min(resolve_thread_count(threads), paths));
  std::atomic<int> next{0};
  auto work = [&]() {
    Eigen::VectorXd z(n);
    while (true) {
      const int p = next.fetch_add(1);
      if (p >= paths) break;
      for (Eigen::Index i = 0; i < n; ++i) {
        z[i] = gdetail::standard_normal(seed, static_cast<std::uint64_t>(p),
                                        static_cast<std::uint64_t>(i));
      }
      out.col(p) = f.lower.triangularView<Eigen::Lower>() * z;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

struct SimulationResult {
  Eigen::MatrixXd paths;  // one column per path
  double jitter = 0.0;
};

inline SimulationResult simulate_paths(const KernelModel& model,
                                       const TimeGrid& grid, int paths,
                                       std::uint64_t seed,
                                       const QuadratureSpec& spec = {},
                                       int threads = 0) {
  Eigen::MatrixXd k = build_cov_matrix(model, grid, spec, threads);
  CholeskyFactor f = cholesky_with_jitter(k);
  return SimulationResult{sample_gaussian(f, paths, seed, threads), f.jitter};
}

struct PredictionResult {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double jitter = 0.0;
};

// Mean pointwise relative error |pred - obs| / |obs| over held-out
// points.  The default forecast-quality summary; meaningful when the
// observations sit away from zero.
inline double relative_prediction_error(const Eigen::VectorXd& predicted,
                                        const Eigen::VectorXd& observed) {
  if (predicted.size() != observed.size() || observed.size() == 0) {
    throw std::invalid_argument("relative_prediction_error: bad sizes");
  }
  return ((predicted - observed).cwiseAbs().array() /
          observed.cwiseAbs().array())
      .mean();
}

// Mean absolute error normalized by the held-out standard deviation; an
// alternative summary that stays meaningful near zero but reads on a
// different scale than the relative version.
inline double sd_normalized_prediction_error(const Eigen::VectorXd& predicted,
                                             const Eigen::VectorXd& observed) {
  if (predicted.size() != observed.size() || observed.size() < 2) {
    throw std::invalid_argument("sd_normalized_prediction_error: bad sizes");
  }
  const double mae = (predicted - observed).cwiseAbs().mean();
  const Eigen::VectorXd centered =
      observed.array() - observed.mean();
  const double sd =
      std::sqrt(centered.squaredNorm() / (observed.size() - 1.0));
  if (!(sd > 0.0)) {
    throw NumericalError("sd_normalized_prediction_error: constant data");
  }
  return mae / sd;
}

// Conditional law of the process at pred_times given exact observations
// at obs_times.  The covariance over the merged grid is assembled once
// and scattered into blocks, so repeated times across the two sets are
// consistent by construction.
inline PredictionResult predict(const KernelModel& model,
                                const std::vector<double>& obs_times,
                                const Eigen::VectorXd& obs_values,
                                const std::vector<double>& pred_times,
                                const QuadratureSpec& spec = {},
                                int threads = 0) {
  if (obs_times.size() != static_cast<std::size_t>(obs_values.size())) {
    throw std::invalid_argument("predict: observation size mismatch");
  }
  std::vector<double> merged = obs_times;
  merged.insert(merged.end(), pred_times.begin(), pred_times.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  TimeGrid joint{merged};
  Eigen::MatrixXd k = build_cov_matrix(model, joint, spec, threads);

  auto index_of = [&](double t) {
    const auto it = std::lower_bound(merged.begin(), merged.end(), t);
    return static_cast<Eigen::Index>(it - merged.begin());
  };
  const Eigen::Index n1 = static_cast<Eigen::Index>(obs_times.size());
  const Eigen::Index n2 = static_cast<Eigen::Index>(pred_times.size());
  Eigen::MatrixXd k11(n1, n1), k12(n1, n2), k22(n2, n2);
  std::vector<Eigen::Index> oi(n1), pi(n2);
  for (Eigen::Index i = 0; i < n1; ++i) oi[i] = index_of(obs_times[i]);
  for (Eigen::Index j = 0; j < n2; ++j) pi[j] = index_of(pred_times[j]);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n1; ++j) k11(i, j) = k(oi[i], oi[j]);
    for (Eigen::Index j = 0; j < n2; ++j) k12(i, j) = k(oi[i], pi[j]);
  }
  for (Eigen::Index i = 0; i < n2; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) k22(i, j) = k(pi[i], pi[j]);
  }

  PredictionResult out;
  if (n1 == 0) {
    out.mean = Eigen::VectorXd::Zero(n2);
    out.cov = k22;
    return out;
  }
  CholeskyFactor f = cholesky_with_jitter(k11);
  ConditionalDistribution cd = condition(f, k12, k22, obs_values);
  out.mean = std::move(cd.mean);
  out.cov = std::move(cd.cov);
  out.jitter = f.jitter;
  return out;
}

}  // namespace wlgp
