#pragma once

// Exact maximum-likelihood fitting with the scale parameter concentrated
// out, Gaussian-approximation confidence intervals, and AIC comparison.
// Every bundled family factors as K = sigma^2 Ktilde(shape), so the
// optimizer only searches shape parameters; sigma_hat is closed form.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wlgp/gaussian.hpp"

namespace wlgp {

enum class FitFamily {
  weighted_log_exp,
  weighted_log_const,
  integrated_ou,
  integrated_fou,
  fbm,
};

inline std::string to_string(FitFamily f) {
  switch (f) {
    case FitFamily::weighted_log_exp: return "weighted_log_exp";
    case FitFamily::weighted_log_const: return "weighted_log_const";
    case FitFamily::integrated_ou: return "integrated_ou";
    case FitFamily::integrated_fou: return "integrated_fou";
    case FitFamily::fbm: return "fbm";
  }
  return "unknown";
}

inline FitFamily fit_family_from_string(const std::string& s) {
  if (s == "weighted_log_exp") return FitFamily::weighted_log_exp;
  if (s == "weighted_log_const") return FitFamily::weighted_log_const;
  if (s == "integrated_ou") return FitFamily::integrated_ou;
  if (s == "integrated_fou") return FitFamily::integrated_fou;
  if (s == "fbm") return FitFamily::fbm;
  throw std::invalid_argument("unknown model family: " + s);
}

struct FitOptions {
  double beta_min = 1e-8;
  double beta_max = 400.0;
  double hurst_min = 0.01;
  double hurst_max = 0.99;
  double tol = 1e-6;   // width tolerance on the transformed coordinate
  int max_iters = 200;
  double ci_level = 0.95;
  QuadratureSpec quad;
  int threads = 0;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
};

struct FitResult {
  FitFamily family = FitFamily::weighted_log_exp;
  KernelModel model = WeightedLogConst{1.0};  // with sigma_hat folded in
  double sigma_hat = 0.0;
  std::optional<double> beta_hat;
  std::optional<double> hurst_hat;
  double log_lik = 0.0;
  double aic = 0.0;
  int n_params = 0;
  std::optional<ConfidenceInterval> sigma_ci;
  std::optional<ConfidenceInterval> beta_ci;
  std::optional<ConfidenceInterval> hurst_ci;
  bool boundary_beta_zero = false;  // profile ran into beta_min; the
                                    // constant-weight limit was refitted
  bool boundary_beta_max = false;
  double jitter = 0.0;              // jitter used at the optimum
  // concentrated log-likelihood samples (shape parameter, value) gathered
  // during 1-D profile searches, sorted by parameter
  std::vector<std::pair<double, double>> profile;
};

// Golden-section maximizer on [lo, hi]; fn is evaluated O(iters) times.
template <class F>
double golden_max(F&& fn, double lo, double hi, double tol, int max_iters) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int i = 0; i < max_iters && (b - a) > tol; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

// Nelder-Mead maximizer in two dimensions with standard coefficients.
template <class F>
std::array<double, 2> nelder_mead_max2(F&& fn, std::array<double, 2> start,
                                       double step, double tol,
                                       int max_iters) {
  struct Vertex {
    std::array<double, 2> x;
    double f;
  };
  auto eval = [&](std::array<double, 2> x) { return Vertex{x, fn(x)}; };
  std::array<Vertex, 3> s = {
      eval(start),
      eval({start[0] + step, start[1]}),
      eval({start[0], start[1] + step}),
  };
  auto order = [&]() {
    std::sort(s.begin(), s.end(),
              [](const Vertex& a, const Vertex& b) { return a.f > b.f; });
  };
  order();
  for (int it = 0; it < max_iters; ++it) {
    const double diam =
        std::max(std::hypot(s[0].x[0] - s[1].x[0], s[0].x[1] - s[1].x[1]),
                 std::hypot(s[0].x[0] - s[2].x[0], s[0].x[1] - s[2].x[1]));
    if (diam < tol) break;
    const std::array<double, 2> centroid = {
        0.5 * (s[0].x[0] + s[1].x[0]), 0.5 * (s[0].x[1] + s[1].x[1])};
    auto along = [&](double t) {
      return std::array<double, 2>{centroid[0] + t * (centroid[0] - s[2].x[0]),
                                   centroid[1] + t * (centroid[1] - s[2].x[1])};
    };
    Vertex refl = eval(along(1.0));
    if (refl.f > s[0].f) {
      Vertex exp_v = eval(along(2.0));
      s[2] = exp_v.f > refl.f ? exp_v : refl;
    } else if (refl.f > s[1].f) {
      s[2] = refl;
    } else {
      Vertex contr = eval(along(refl.f > s[2].f ? 0.5 : -0.5));
      if (contr.f > std::min(refl.f, s[2].f)) {
        s[2] = contr;
      } else {  // shrink toward the best vertex
        for (int i = 1; i < 3; ++i) {
          s[i] = eval({0.5 * (s[i].x[0] + s[0].x[0]),
                       0.5 * (s[i].x[1] + s[0].x[1])});
        }
      }
    }
    order();
  }
  return s[0].x;
}

namespace fdetail {

struct ConcentratedEval {
  double log_lik = 0.0;
  double sigma_hat = 0.0;
  double log_det = 0.0;  // of the unit-scale matrix
  double quad = 0.0;     // x' Ktilde^{-1} x
  double jitter = 0.0;
};

inline ConcentratedEval concentrated_eval(const KernelModel& unit_model,
                                          const TimeGrid& grid,
                                          const Eigen::VectorXd& x,
                                          const FitOptions& opt) {
  Eigen::MatrixXd k = build_cov_matrix(unit_model, grid, opt.quad, opt.threads);
  CholeskyFactor f = cholesky_with_jitter(k);
  Eigen::VectorXd half = x;
  f.lower.triangularView<Eigen::Lower>().solveInPlace(half);
  const double quad = half.squaredNorm();
  const double n = static_cast<double>(x.size());
  const double s2 = quad / n;
  if (!(s2 > 0.0)) {
    throw NumericalError("concentrated likelihood: degenerate data");
  }
  ConcentratedEval out;
  out.quad = quad;
  out.sigma_hat = std::sqrt(s2);
  out.log_det = f.log_det;
  out.jitter = f.jitter;
  out.log_lik = -0.5 * (n * std::log(2.0 * std::numbers::pi) +
                        n * std::log(s2) + f.log_det + n);
  return out;
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double expit(double y) { return 1.0 / (1.0 + std::exp(-y)); }

}  // namespace fdetail

// Gaussian-approximation interval: the observed curvature is estimated by
// a central second difference with a 5% relative step (clamped so both
// probe points stay inside (lo, hi)).  A non-concave profile yields no
// interval.
inline std::optional<ConfidenceInterval> ga_interval(
    const std::function<double(double)>& ll, double that, double level,
    double lo = -std::numeric_limits<double>::infinity(),
    double hi = std::numeric_limits<double>::infinity(),
    double rel_step = 0.05) {
  double h = rel_step * std::abs(that);
  if (h == 0.0) h = rel_step;
  h = std::min(h, 0.9 * (that - lo));
  h = std::min(h, 0.9 * (hi - that));
  if (!(h > 0.0)) return std::nullopt;
  const double l0 = ll(that);
  const double lp = ll(that + h);
  const double lm = ll(that - h);
  const double curv = -(lp - 2.0 * l0 + lm) / (h * h);
  if (!(curv > 0.0) || !std::isfinite(curv)) return std::nullopt;
  const double z = inverse_normal_cdf(0.5 * (1.0 + level));
  const double half = z / std::sqrt(curv);
  return ConfidenceInterval{that - half, that + half};
}

// Smallest beta whose profile log-likelihood is within epsilon of the
// value at beta_max, for profiles that increase toward the upper bound
// (an effective lower bound on plausible mean-reversion rates when the
// likelihood never turns over).  A profile with an interior maximizer is
// rejected: the usual interval machinery applies there instead.
inline double flat_profile_beta(const std::function<double(double)>& ll,
                                double beta_min, double beta_max,
                                double epsilon = 1e-2) {
  if (!(beta_min > 0.0 && beta_min < beta_max)) {
    throw std::invalid_argument("flat_profile_beta: bad bounds");
  }
  const double lo = std::log(beta_min), hi = std::log(beta_max);
  const int per_decade = 64;
  const int npts =
      std::max(2, static_cast<int>((hi - lo) / std::log(10.0) * per_decade) + 1);
  std::vector<double> ys(npts), ls(npts);
  for (int i = 0; i < npts; ++i) {
    ys[i] = lo + (hi - lo) * i / (npts - 1);
    ls[i] = ll(std::exp(ys[i]));
  }
  const double l_end = ls.back();
  double l_max = l_end;
  int i_max = npts - 1;
  for (int i = 0; i < npts; ++i) {
    if (ls[i] > l_max) {
      l_max = ls[i];
      i_max = i;
    }
  }
  if (i_max != npts - 1 &&
      l_max > l_end + 1e-9 * (1.0 + std::abs(l_end))) {
    throw std::invalid_argument(
        "flat_profile_beta: profile has an interior maximizer");
  }
  const double target = l_end - epsilon;
  int first = npts - 1;
  for (int i = 0; i < npts; ++i) {
    if (ls[i] >= target) {
      first = i;
      break;
    }
  }
  if (first == 0) return beta_min;  // the whole range is already flat
  // bisect the crossing of ll = target between the bracketing grid points
  double a = ys[first - 1], b = ys[first];
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    const double mid = 0.5 * (a + b);
    (ll(std::exp(mid)) >= target ? b : a) = mid;
  }
  return std::exp(0.5 * (a + b));
}

namespace fdetail {

inline KernelModel unit_model(FitFamily family, double beta, double hurst) {
  switch (family) {
    case FitFamily::weighted_log_exp: return WeightedLogExp{1.0, beta};
    case FitFamily::weighted_log_const: return WeightedLogConst{1.0};
    case FitFamily::integrated_ou: return IntegratedOU{1.0, beta};
    case FitFamily::integrated_fou: return IntegratedFOU{1.0, beta, hurst};
    case FitFamily::fbm: return FBM{1.0, hurst};
  }
  throw std::invalid_argument("unit_model: unknown family");
}

inline KernelModel scaled_model(FitFamily family, double sigma, double beta,
                                double hurst) {
  switch (family) {
    case FitFamily::weighted_log_exp: return WeightedLogExp{sigma, beta};
    case FitFamily::weighted_log_const: return WeightedLogConst{sigma};
    case FitFamily::integrated_ou: return IntegratedOU{sigma, beta};
    case FitFamily::integrated_fou: return IntegratedFOU{sigma, beta, hurst};
    case FitFamily::fbm: return FBM{sigma, hurst};
  }
  throw std::invalid_argument("scaled_model: unknown family");
}

inline int param_count(FitFamily family) {
  switch (family) {
    case FitFamily::weighted_log_exp: return 2;   // sigma, beta
    case FitFamily::weighted_log_const: return 1; // alpha
    case FitFamily::integrated_ou: return 2;
    case FitFamily::integrated_fou: return 3;
    case FitFamily::fbm: return 2;
  }
  return 0;
}

}  // namespace fdetail

inline FitResult fit_mle(FitFamily family, const TimeGrid& grid,
                         const Eigen::VectorXd& x,
                         const FitOptions& opt = {}) {
  validate_grid(grid);
  if (static_cast<std::size_t>(x.size()) != grid.times.size()) {
    throw std::invalid_argument("fit_mle: data/grid size mismatch");
  }
  const double n = static_cast<double>(x.size());
  const double z = inverse_normal_cdf(0.5 * (1.0 + opt.ci_level));

  FitResult out;
  out.family = family;
  out.n_params = fdetail::param_count(family);

  // concentrated profile in the shape parameters; failed factorizations
  // count as -inf so the search simply avoids them
  std::vector<std::pair<double, double>> profile;
  auto profile_ll = [&](double beta, double hurst,
                        bool record_as_beta) -> double {
    double value;
    try {
      value =
          fdetail::concentrated_eval(fdetail::unit_model(family, beta, hurst),
                                     grid, x, opt)
              .log_lik;
    } catch (const NumericalError&) {
      value = -1e300;
    }
    if (record_as_beta) profile.emplace_back(beta, value);
    return value;
  };

  double beta_hat = 0.0, hurst_hat = 0.0;
  switch (family) {
    case FitFamily::weighted_log_const:
      break;
    case FitFamily::weighted_log_exp:
    case FitFamily::integrated_ou: {
      const double yhat = golden_max(
          [&](double y) { return profile_ll(std::exp(y), 0.0, true); },
          std::log(opt.beta_min), std::log(opt.beta_max), opt.tol,
          opt.max_iters);
      beta_hat = std::exp(yhat);
      out.boundary_beta_zero = yhat - std::log(opt.beta_min) < 10.0 * opt.tol;
      out.boundary_beta_max = std::log(opt.beta_max) - yhat < 10.0 * opt.tol;
      break;
    }
    case FitFamily::fbm: {
      const double yhat = golden_max(
          [&](double y) { return profile_ll(0.0, fdetail::expit(y), false); },
          fdetail::logit(opt.hurst_min), fdetail::logit(opt.hurst_max),
          opt.tol, opt.max_iters);
      hurst_hat = fdetail::expit(yhat);
      break;
    }
    case FitFamily::integrated_fou: {
      // start from the plain OU rate, i.e. the H = 1/2 member
      FitOptions ou_opt = opt;
      FitResult ou = fit_mle(FitFamily::integrated_ou, grid, x, ou_opt);
      const std::array<double, 2> yhat = nelder_mead_max2(
          [&](std::array<double, 2> y) {
            const double beta = std::exp(std::clamp(
                y[0], std::log(opt.beta_min), std::log(opt.beta_max)));
            const double hurst = fdetail::expit(std::clamp(
                y[1], fdetail::logit(opt.hurst_min),
                fdetail::logit(opt.hurst_max)));
            return profile_ll(beta, hurst, false);
          },
          {std::log(std::max(ou.beta_hat.value(), opt.beta_min * 10.0)),
           fdetail::logit(0.5)},
          0.5, opt.tol, opt.max_iters);
      beta_hat = std::exp(
          std::clamp(yhat[0], std::log(opt.beta_min), std::log(opt.beta_max)));
      hurst_hat = fdetail::expit(std::clamp(yhat[1],
                                            fdetail::logit(opt.hurst_min),
                                            fdetail::logit(opt.hurst_max)));
      out.boundary_beta_zero =
          yhat[0] - std::log(opt.beta_min) < 10.0 * opt.tol;
      out.boundary_beta_max =
          std::log(opt.beta_max) - yhat[0] < 10.0 * opt.tol;
      break;
    }
  }

  // a profile pinned at beta_min is the constant-weight limit in disguise:
  // report that model instead, with its own parameter count
  if (out.boundary_beta_zero && family == FitFamily::weighted_log_exp) {
    FitResult limit = fit_mle(FitFamily::weighted_log_const, grid, x, opt);
    limit.boundary_beta_zero = true;
    return limit;
  }

  auto final_eval = fdetail::concentrated_eval(
      fdetail::unit_model(family, beta_hat, hurst_hat), grid, x, opt);
  out.sigma_hat = final_eval.sigma_hat;
  out.log_lik = final_eval.log_lik;
  out.aic = 2.0 * out.n_params - 2.0 * out.log_lik;
  out.jitter = final_eval.jitter;
  out.model =
      fdetail::scaled_model(family, final_eval.sigma_hat, beta_hat, hurst_hat);
  if (family == FitFamily::weighted_log_exp ||
      family == FitFamily::integrated_ou ||
      family == FitFamily::integrated_fou) {
    out.beta_hat = beta_hat;
  }
  if (family == FitFamily::fbm || family == FitFamily::integrated_fou) {
    out.hurst_hat = hurst_hat;
  }

  // Wald intervals from the numerically profiled log-likelihood: each
  // parameter's curve re-maximizes over every other free parameter (the
  // scale analytically, a second shape parameter by line search), so the
  // curvature is the marginal information, not the conditional one.  A
  // slice at the fitted shape would be too narrow whenever the estimates
  // are correlated, which they strongly are when beta * horizon is small.
  const bool has_beta_param = out.beta_hat.has_value();
  const bool has_hurst_param = out.hurst_hat.has_value();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const double y_beta_lo = std::log(opt.beta_min);
  const double y_beta_hi = std::log(opt.beta_max);
  const double y_h_lo = fdetail::logit(opt.hurst_min);
  const double y_h_hi = fdetail::logit(opt.hurst_max);

  // log-determinant and quadratic form depend on the shape only; cache
  // them so sigma-profile probes revisiting a shape skip the factorization
  std::map<std::pair<double, double>, std::pair<double, double>> shape_cache;
  shape_cache.emplace(std::make_pair(beta_hat, hurst_hat),
                      std::make_pair(final_eval.log_det, final_eval.quad));
  auto full_ll = [&](double sigma, double beta, double hurst) -> double {
    try {
      auto it = shape_cache.find({beta, hurst});
      if (it == shape_cache.end()) {
        auto ev = fdetail::concentrated_eval(
            fdetail::unit_model(family, beta, hurst), grid, x, opt);
        it = shape_cache
                 .emplace(std::make_pair(beta, hurst),
                          std::make_pair(ev.log_det, ev.quad))
                 .first;
      }
      return -0.5 * (n * log2pi + 2.0 * n * std::log(sigma) +
                     it->second.first + it->second.second / (sigma * sigma));
    } catch (const NumericalError&) {
      return -1e300;
    }
  };

  auto profile_sigma = [&](double sigma) -> double {
    if (has_beta_param && has_hurst_param) {
      const auto y = nelder_mead_max2(
          [&](std::array<double, 2> yv) {
            return full_ll(sigma,
                           std::exp(std::clamp(yv[0], y_beta_lo, y_beta_hi)),
                           fdetail::expit(std::clamp(yv[1], y_h_lo, y_h_hi)));
          },
          {std::log(beta_hat), fdetail::logit(hurst_hat)}, 0.25, opt.tol,
          opt.max_iters);
      return full_ll(sigma, std::exp(std::clamp(y[0], y_beta_lo, y_beta_hi)),
                     fdetail::expit(std::clamp(y[1], y_h_lo, y_h_hi)));
    }
    if (has_beta_param) {
      const double y = golden_max(
          [&](double v) { return full_ll(sigma, std::exp(v), hurst_hat); },
          y_beta_lo, y_beta_hi, opt.tol, opt.max_iters);
      return full_ll(sigma, std::exp(y), hurst_hat);
    }
    if (has_hurst_param) {
      const double y = golden_max(
          [&](double h) { return full_ll(sigma, beta_hat, fdetail::expit(h)); },
          y_h_lo, y_h_hi, opt.tol, opt.max_iters);
      return full_ll(sigma, beta_hat, fdetail::expit(y));
    }
    return full_ll(sigma, beta_hat, hurst_hat);
  };
  out.sigma_ci = ga_interval(profile_sigma, out.sigma_hat, opt.ci_level, 0.0);

  if (has_beta_param) {
    std::function<double(double)> prof;
    if (has_hurst_param) {
      prof = [&](double beta) {
        const double y = golden_max(
            [&](double h) {
              return profile_ll(beta, fdetail::expit(h), false);
            },
            y_h_lo, y_h_hi, opt.tol, opt.max_iters);
        const double value = profile_ll(beta, fdetail::expit(y), false);
        profile.emplace_back(beta, value);
        return value;
      };
    } else {
      prof = [&](double beta) { return profile_ll(beta, hurst_hat, true); };
    }
    out.beta_ci =
        ga_interval(prof, *out.beta_hat, opt.ci_level, 0.0, 2.0 * opt.beta_max);
  }
  if (has_hurst_param) {
    std::function<double(double)> prof;
    if (has_beta_param) {
      prof = [&](double h) {
        const double y = golden_max(
            [&](double v) { return profile_ll(std::exp(v), h, false); },
            y_beta_lo, y_beta_hi, opt.tol, opt.max_iters);
        return profile_ll(std::exp(y), h, false);
      };
    } else {
      prof = [&](double h) { return profile_ll(beta_hat, h, false); };
    }
    out.hurst_ci = ga_interval(prof, *out.hurst_hat, opt.ci_level, 0.0, 1.0);
  }

  std::sort(profile.begin(), profile.end());
  profile.erase(std::unique(profile.begin(), profile.end(),
                            [](const auto& a, const auto& b) {
                              return a.first == b.first;
                            }),
                profile.end());
  out.profile = std::move(profile);
  return out;
}

struct ModelComparison {
  std::vector<FitResult> fits;
  std::size_t best = 0;  // index of the smallest AIC
};

inline ModelComparison compare_models(const std::vector<FitFamily>& families,
                                      const TimeGrid& grid,
                                      const Eigen::VectorXd& x,
                                      const FitOptions& opt = {}) {
  if (families.empty()) {
    throw std::invalid_argument("compare_models: no families given");
  }
  ModelComparison out;
  out.fits.reserve(families.size());
  for (FitFamily f : families) out.fits.push_back(fit_mle(f, grid, x, opt));
  for (std::size_t i = 1; i < out.fits.size(); ++i) {
    if (out.fits[i].aic < out.fits[out.best].aic) out.best = i;
  }
  return out;
}

}  // namespace wlgp
