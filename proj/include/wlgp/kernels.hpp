#pragma once

// Covariance kernels for zero-mean Gaussian movement models.
//
// The weighted-log family is
//   K_f(s,t) = int_0^{min(s,t)} f(u) * q_base(s-u, t-u) du
// with q_base(x,y) = 2[(x+y)log(x+y) - x log x - y log y], f >= 0 and
// integrable at the origin.  Slices: variance(t) = 4 log2 *
// int_0^t f(u)(t-u) du.  Increments grow like log of the time lag,
// which is what gives the family its long-range dependence.
//
// Competing families: integrated (fractional) Ornstein-Uhlenbeck and
// fractional Brownian motion.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "wlgp/expr.hpp"
#include "wlgp/grid.hpp"
#include "wlgp/quadrature.hpp"

namespace wlgp {

// x log x extended by continuity at x = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Elementary kernel of the family: the covariance contribution of a unit
// mass of weight at lag 0.
inline double q_base(double s, double t) {
  return 2.0 * (xlogx(s + t) - xlogx(t) - xlogx(s));
}

// User-supplied weight with its origin behavior and a certificate that
// int_0^delta f is finite.
struct WeightFunction {
  ExprPtr expr;
  std::string source;
  std::optional<double> singularity_exponent;
  IntegrabilityCheck certificate;
};

inline WeightFunction make_weight(const std::string& text,
                                  std::optional<double> singularity_exponent = {},
                                  double delta = 1.0) {
  WeightFunction w;
  w.expr = parse_weight(text);
  w.source = text;
  w.singularity_exponent = singularity_exponent;
  w.certificate = check_integrability(*w.expr, delta, singularity_exponent);
  if (!w.certificate.ok) {
    throw std::invalid_argument("weight rejected: " + w.certificate.message);
  }
  return w;
}

struct WeightedLog {
  WeightFunction weight;
};
struct WeightedLogExp {  // f(u) = sigma^2 / (2 beta) * exp(-beta u)
  double sigma, beta;
};
struct WeightedLogConst {  // f(u) = alpha^2, closed form
  double alpha;
};
struct WeightedLogPoly {  // f(u) = u^alpha, alpha > -1
  double alpha;
};
struct IntegratedOU {  // position with OU velocity, closed form
  double sigma, beta;
};
struct IntegratedFOU {  // velocity driven by fBm(hurst), double integral
  double sigma, beta, hurst;
};
struct FBM {
  double sigma, hurst;
};

using KernelModel =
    std::variant<WeightedLog, WeightedLogExp, WeightedLogConst,
                 WeightedLogPoly, IntegratedOU, IntegratedFOU, FBM>;

inline void validate_model(const KernelModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WeightedLog>) {
          if (!m.weight.expr || !m.weight.certificate.ok)
            throw std::invalid_argument("weighted_log: weight not certified");
        } else if constexpr (std::is_same_v<T, WeightedLogExp>) {
          if (!(m.sigma > 0.0) || !(m.beta > 0.0))
            throw std::invalid_argument("weighted_log_exp: need sigma, beta > 0");
        } else if constexpr (std::is_same_v<T, WeightedLogConst>) {
          if (!(m.alpha != 0.0))
            throw std::invalid_argument("weighted_log_const: need alpha != 0");
        } else if constexpr (std::is_same_v<T, WeightedLogPoly>) {
          if (!(m.alpha > -1.0))
            throw std::invalid_argument("weighted_log_poly: need alpha > -1");
        } else if constexpr (std::is_same_v<T, IntegratedOU>) {
          if (!(m.sigma > 0.0) || !(m.beta > 0.0))
            throw std::invalid_argument("integrated_ou: need sigma, beta > 0");
        } else if constexpr (std::is_same_v<T, IntegratedFOU>) {
          if (!(m.sigma > 0.0) || !(m.beta > 0.0) || !(m.hurst > 0.0) ||
              !(m.hurst < 1.0))
            throw std::invalid_argument(
                "integrated_fou: need sigma, beta > 0 and hurst in (0,1)");
        } else if constexpr (std::is_same_v<T, FBM>) {
          if (!(m.sigma > 0.0) || !(m.hurst > 0.0) || !(m.hurst < 1.0))
            throw std::invalid_argument(
                "fbm: need sigma > 0 and hurst in (0,1)");
        }
      },
      model);
}

namespace kdetail {

// Evaluator + origin exponent for the quadrature-backed weighted-log
// variants.  Closed-form variants never reach here.
struct WeightView {
  const WeightFunction* user = nullptr;
  double sigma2_over_2beta = 0.0, beta = 0.0;  // exponential shape
  double poly_alpha = 0.0;
  int tag = 0;  // 0 user expr, 1 exponential, 2 power

  double operator()(double u) const {
    switch (tag) {
      case 1:
        return sigma2_over_2beta * std::exp(-beta * u);
      case 2:
        return std::pow(u, poly_alpha);
      default:
        return eval_weight(*user->expr, u);
    }
  }
  std::optional<double> hint() const {
    if (tag == 0) return user->singularity_exponent;
    if (tag == 2 && poly_alpha < 0.0) return poly_alpha;
    return std::nullopt;
  }
};

inline std::optional<WeightView> weight_view(const KernelModel& model) {
  if (const auto* w = std::get_if<WeightedLog>(&model)) {
    WeightView v;
    v.user = &w->weight;
    v.tag = 0;
    return v;
  }
  if (const auto* e = std::get_if<WeightedLogExp>(&model)) {
    WeightView v;
    v.sigma2_over_2beta = e->sigma * e->sigma / (2.0 * e->beta);
    v.beta = e->beta;
    v.tag = 1;
    return v;
  }
  if (const auto* p = std::get_if<WeightedLogPoly>(&model)) {
    WeightView v;
    v.poly_alpha = p->alpha;
    v.tag = 2;
    return v;
  }
  if (const auto* c = std::get_if<WeightedLogConst>(&model)) {
    WeightView v;
    v.sigma2_over_2beta = c->alpha * c->alpha;  // constant weight
    v.beta = 0.0;
    v.tag = 1;
    return v;
  }
  return std::nullopt;
}

inline double require(const QuadratureResult& r, double s, double t,
                      const char* what) {
  if (!r.converged) {
    throw QuadratureError(std::string(what) + ": quadrature did not converge at (s,t)=(" +
                          std::to_string(s) + ", " + std::to_string(t) + ")");
  }
  return r.value;
}

// int_0^m f(u) (m - u) log(m - u) du, the only kink-carrying piece of the
// covariance quadrature; reusable across a matrix row.
inline double kink_integral(const WeightView& f, double m,
                            const QuadratureSpec& spec) {
  auto g = [&f, m](double u) { return f(u) * xlogx(m - u); };
  return require(integrate(g, 0.0, m, spec, f.hint()), m, m, "cov");
}

// Covariance of the weighted-log family by quadrature, decomposed as
// 2 [ A - B ] with smooth A and row-reusable B (the kink integral).
inline double weighted_log_cov(const WeightView& f, double s, double t,
                               const QuadratureSpec& spec,
                               std::optional<double> precomputed_kink = {}) {
  const double m = std::min(s, t);
  const double M = std::max(s, t);
  if (m <= 0.0) return 0.0;
  if (s == t) {
    auto g = [&f, t](double u) { return f(u) * (t - u); };
    return 4.0 * std::log(2.0) *
           require(integrate(g, 0.0, t, spec, f.hint()), s, t, "variance");
  }
  auto smooth = [&f, s, t, M](double u) {
    return f(u) * (xlogx(s + t - 2.0 * u) - xlogx(M - u));
  };
  const double a = require(integrate(smooth, 0.0, m, spec, f.hint()), s, t, "cov");
  const double b =
      precomputed_kink ? *precomputed_kink : kink_integral(f, m, spec);
  return 2.0 * (a - b);
}

// Closed form for constant weight f = alpha^2 (log-covariance model).
inline double const_cov_unit(double s, double t) {
  const double d = std::abs(t - s);
  return 0.5 * (s + t) * xlogx(s + t) + 0.5 * d * xlogx(d) - s * xlogx(s) -
         t * xlogx(t);
}

inline double integrated_ou_cov(double sigma, double beta, double s,
                                double t) {
  const double m = std::min(s, t);
  if (m <= 0.0) return 0.0;
  const double c = sigma * sigma / (beta * beta);
  const double e1 = (std::exp(-beta * (t - m)) - std::exp(-beta * t)) / beta;
  const double e2 = (std::exp(-beta * (s - m)) - std::exp(-beta * s)) / beta;
  const double e3 = (std::exp(-beta * (t + s - 2.0 * m)) -
                     std::exp(-beta * (t + s))) /
                    (2.0 * beta);
  return c * (m - e1 - e2 + e3);
}

inline double fbm_cov(double sigma, double hurst, double s, double t) {
  const double h2 = 2.0 * hurst;
  return sigma * sigma * 0.5 *
         (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

// fBm covariance of the driving noise, c_H(x, y).
inline double fbm_unit(double h2, double x, double y) {
  return 0.5 * (std::pow(x, h2) + std::pow(y, h2) -
                std::pow(std::abs(x - y), h2));
}

inline double integrated_fou_cov(double sigma, double beta, double hurst,
                                 double s, double t,
                                 const QuadratureSpec& spec) {
  if (std::min(s, t) <= 0.0) return 0.0;
  const double h2 = 2.0 * hurst;
  auto fn = [beta, h2, s, t](double v, double u) {
    return std::exp(-beta * v) * std::exp(-beta * u) *
           fbm_unit(h2, t - v, s - u);
  };
  // kink of |,(t-v)-(s-u)|^{2H} sits on v - u = t - s
  QuadratureResult r = integrate_2d(fn, Rect{0.0, t, 0.0, s},
                                    RidgeLine{t - s}, spec);
  return sigma * sigma * require(r, s, t, "cov");
}

}  // namespace kdetail

// Covariance K(s, t) of the model at nonnegative times.
inline double cov(const KernelModel& model, double s, double t,
                  const QuadratureSpec& spec = {}) {
  if (s < 0.0 || t < 0.0) {
    throw std::invalid_argument("cov: times must be nonnegative");
  }
  if (const auto* c = std::get_if<WeightedLogConst>(&model)) {
    return c->alpha * c->alpha * kdetail::const_cov_unit(s, t);
  }
  if (const auto* o = std::get_if<IntegratedOU>(&model)) {
    return kdetail::integrated_ou_cov(o->sigma, o->beta, s, t);
  }
  if (const auto* f = std::get_if<FBM>(&model)) {
    return kdetail::fbm_cov(f->sigma, f->hurst, s, t);
  }
  if (const auto* q = std::get_if<IntegratedFOU>(&model)) {
    return kdetail::integrated_fou_cov(q->sigma, q->beta, q->hurst, s, t,
                                       spec);
  }
  auto view = kdetail::weight_view(model);
  return kdetail::weighted_log_cov(*view, s, t, spec);
}

inline double variance(const KernelModel& model, double t,
                       const QuadratureSpec& spec = {}) {
  return cov(model, t, t, spec);
}

// E (zeta_t - zeta_s)^2 for 0 <= s <= t.  Weighted-log models use the
// two-layer form: 4 log2 int_s^t f(u)(t-u) du plus a cross term over
// [0, s]; other families fall back to var(t) + var(s) - 2 cov(s, t).
inline double increment_second_moment(const KernelModel& model, double s,
                                      double t,
                                      const QuadratureSpec& spec = {}) {
  if (!(0.0 <= s && s <= t)) {
    throw std::invalid_argument("increment_second_moment: need 0 <= s <= t");
  }
  if (s == t) return 0.0;
  auto view = kdetail::weight_view(model);
  if (!view) {
    return variance(model, t, spec) + variance(model, s, spec) -
           2.0 * cov(model, s, t, spec);
  }
  const auto& f = *view;
  auto fresh = [&f, t](double u) { return f(u) * (t - u); };
  // weight stays smooth on [s, t]: the origin hint applies only at 0
  const double head =
      (s == 0.0)
          ? kdetail::require(integrate(fresh, 0.0, t, spec, f.hint()), s, t,
                             "increment")
          : kdetail::require(integrate(fresh, s, t, spec), s, t, "increment");
  double cross = 0.0;
  if (s > 0.0) {
    auto inner = [s, t](double u) {
      return 0.5 * xlogx(2.0 * (t - u)) + 0.5 * xlogx(2.0 * (s - u)) -
             xlogx(s + t - 2.0 * u);
    };
    auto g = [&f, inner](double u) { return f(u) * inner(u); };
    cross = kdetail::require(integrate(g, 0.0, s, spec, f.hint()), s, t,
                             "increment");
  }
  return 4.0 * std::log(2.0) * head + 4.0 * cross;
}

// 2 int_0^r f(u) (r - u) du: the coefficient of the log t growth of
// cov(zeta_r, zeta_t) as t -> infinity.
inline double log_growth_coeff(const KernelModel& model, double r,
                               const QuadratureSpec& spec = {}) {
  auto view = kdetail::weight_view(model);
  if (!view) {
    throw std::invalid_argument(
        "log_growth_coeff: defined for weighted-log models only");
  }
  if (!(r >= 0.0)) throw std::invalid_argument("log_growth_coeff: r >= 0");
  if (r == 0.0) return 0.0;
  const auto& f = *view;
  auto g = [&f, r](double u) { return f(u) * (r - u); };
  return 2.0 * kdetail::require(integrate(g, 0.0, r, spec, f.hint()), r, r,
                                "log_growth_coeff");
}

// Limit of T * E[(zeta_nu - zeta_r)(zeta_{t+T} - zeta_{s+T})] as T grows:
// 2 (t - s) [ int_0^nu f(u)(nu-u) du - int_0^r f(u)(r-u) du ].
inline double lrd_limit(const KernelModel& model, double nu, double r,
                        double t, double s, const QuadratureSpec& spec = {}) {
  if (!(r <= nu)) throw std::invalid_argument("lrd_limit: need r <= nu");
  return (t - s) * (log_growth_coeff(model, nu, spec) -
                    log_growth_coeff(model, r, spec));
}

namespace kdetail {

// S_P(v) = (P+v) log1p(v/P) - (P-v) log1p(-v/P) - 2v, the odd remainder of
// Lambda(P+v) - Lambda(P-v) - 2v log P with Lambda(z) = z log z - z.  For
// v << P the direct formula cancels from ~2v down to ~v^3/P^2, so a series
// takes over: S_P(v) = -sum_{j>=1} v^{2j+1} / (j(2j+1) P^{2j}).
inline double s_remainder(double P, double v) {
  const double x = v / P;
  if (x > 0.5) {
    return (P + v) * std::log1p(x) - (P - v) * std::log1p(-x) - 2.0 * v;
  }
  const double x2 = x * x;
  double sum = 0.0;
  double power = v * x2;  // v^{2j+1} / P^{2j} at j = 1
  for (int j = 1; j < 64; ++j) {
    const double term = power / (j * (2.0 * j + 1.0));
    sum += term;
    if (term < 1e-18 * sum) break;
    power *= x2;
  }
  return -sum;
}

}  // namespace kdetail

// E[(zeta_nu - zeta_r)(zeta_b - zeta_a)] for the constant-weight closed
// form, organized so widely separated blocks (a, b >> nu) lose no
// precision: the naive four-term combination cancels catastrophically.
// From d2K/ds dt = 2 alpha^2 / (s + t), the value is
//   alpha^2 int_r^nu [Lambda(b+v) - Lambda(b-v) - Lambda(a+v) + Lambda(a-v)] dv
// and with the Lambda differences reduced by s_remainder the integrand
// becomes 2v log(b/a) + S_b(v) - S_a(v).  The first part integrates
// exactly; the remainder series integrates term by term into
//   sum_{j>=1} (nu^{2j+2} - r^{2j+2}) / (2j(j+1)(2j+1)) (a^{-2j} - b^{-2j}),
// all positive terms, used whenever it converges fast (nu <= a/2).
inline double const_increment_cross_cov(double alpha, double r, double nu,
                                        double a, double b) {
  if (!(0.0 < r && r <= nu && nu <= a && a < b)) {
    throw std::invalid_argument(
        "const_increment_cross_cov: need 0 < r <= nu <= a < b");
  }
  if (r == nu) return 0.0;
  const double L = std::log1p((b - a) / a);  // log(b/a)
  const double lead = (nu - r) * (nu + r) * L;
  if (nu <= 0.5 * a) {
    // term_j = (nu^{2j+2} - r^{2j+2})(a^{-2j} - b^{-2j}) / (2j(j+1)(2j+1)),
    // expressed through ratios <= 1/4 so nothing overflows, with the
    // a/b difference as (nu/a)^{2j} (1 - e^{-2jL}) while 2jL is small.
    const double z = (nu / a) * (nu / a), y = (r / a) * (r / a);
    const double zb = (nu / b) * (nu / b), yb = (r / b) * (r / b);
    double sum = 0.0;
    double zj = 1.0, yj = 1.0, zbj = 1.0, ybj = 1.0;
    for (int j = 1; j < 256; ++j) {
      zj *= z;
      yj *= y;
      zbj *= zb;
      ybj *= yb;
      double top_nu, top_r;
      if (2.0 * j * L < 0.7) {
        const double e = -std::expm1(-2.0 * j * L);
        top_nu = nu * nu * zj * e;
        top_r = r * r * yj * e;
      } else {
        top_nu = nu * nu * (zj - zbj);
        top_r = r * r * (yj - ybj);
      }
      const double term =
          (top_nu - top_r) / (2.0 * j * (j + 1.0) * (2.0 * j + 1.0));
      sum += term;
      if (term < 1e-18 * (sum + lead)) break;
    }
    return alpha * alpha * (lead + sum);
  }
  auto integrand = [&](double v) {
    return 2.0 * v * L + kdetail::s_remainder(b, v) -
           kdetail::s_remainder(a, v);
  };
  const double value =
      kdetail::require(integrate(integrand, r, nu), r, nu, "cross cov");
  return alpha * alpha * value;
}

// Dense covariance matrix over a validated grid.  Entries are
// independent; rows are distributed over threads.  The kink integral of
// the weighted-log quadrature is shared within each row.
inline Eigen::MatrixXd build_cov_matrix(const KernelModel& model,
                                        const TimeGrid& grid,
                                        const QuadratureSpec& spec = {},
                                        int threads = 0) {
  validate_grid(grid);
  validate_model(model);
  const int n = static_cast<int>(grid.times.size());
  Eigen::MatrixXd K(n, n);
  const int workers = std::min(resolve_thread_count(threads), n);
  auto view = kdetail::weight_view(model);
  const bool closed_const = std::holds_alternative<WeightedLogConst>(model);
  const bool quadrature_family = view.has_value() && !closed_const;

  std::atomic<int> next_row{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](int worker) {
    try {
      while (true) {
        const int i = next_row.fetch_add(1);
        if (i >= n) break;
        const double ti = grid.times[i];
        std::optional<double> kink;
        if (quadrature_family) {
          kink = kdetail::kink_integral(*view, ti, spec);
        }
        for (int j = i; j < n; ++j) {
          const double tj = grid.times[j];
          double v;
          if (quadrature_family) {
            v = (i == j) ? kdetail::weighted_log_cov(*view, ti, ti, spec)
                         : kdetail::weighted_log_cov(*view, ti, tj, spec, kink);
          } else {
            v = cov(model, ti, tj, spec);
          }
          K(i, j) = v;
          K(j, i) = v;
        }
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return K;
}

}  // namespace wlgp
