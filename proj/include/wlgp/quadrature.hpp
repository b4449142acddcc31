#pragma once

// Adaptive numerical integration.
//
// 1-D: globally adaptive 15-point Gauss-Kronrod (embedded 7-point Gauss)
// with bisection of the largest-error panel.  An optional left-endpoint
// power exponent alpha in (-1, 0) removes an integrable singularity
// f(u) ~ (u - a)^alpha by the substitution u = a + v^(1/(1+alpha)).
//
// 2-D: tensor-product Gauss-Legendre panels over a rectangle.  When a
// kink line {x - y = offset} is declared, the rectangle is pre-split
// into kink-free sub-rectangles plus the kink segment's bounding square
// (slope one, so that box is always a square with the kink as its main
// diagonal); the square is integrated as two smooth triangles in
// kink-aligned iterated coordinates so no panel straddles the kink.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlgp {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace qdetail {

// 15-point Kronrod nodes/weights, embedded 7-point Gauss (QUADPACK dqk15).
// Odd-index nodes are the Gauss abscissae.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// One GK15 panel: value, QUADPACK-style error estimate.
template <class F>
inline void gk15_panel(const F& f, double a, double b, double& value,
                       double& error) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = std::abs(resk);
  std::array<double, 7> fv1{};
  std::array<double, 7> fv2{};
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double x = h * kXgk[jtw];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double x = h * kXgk[jtwm1];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  value = resk * h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps)) {
    err = std::max(eps * 50.0 * resabs, err);
  }
  error = err;
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// Globally adaptive GK15 over [a, b].  Panels narrower than a few ulps
// are frozen (their error stays in the total but they are not split).
template <class F>
inline QuadratureResult adapt_gk15(const F& f, double a, double b,
                                   const QuadratureSpec& spec) {
  QuadratureResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  std::priority_queue<Panel> queue;
  Panel first{a, b, 0.0, 0.0};
  gk15_panel(f, a, b, first.value, first.error);
  double total = first.value;
  double total_err = first.error;
  double frozen_err = 0.0;
  queue.push(first);
  int splits = 0;
  const double eps = std::numeric_limits<double>::epsilon();
  while (true) {
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
    if (total_err <= tol) {
      res.converged = true;
      break;
    }
    if (splits >= spec.max_subdivisions || queue.empty()) break;
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const double width_floor =
        eps * 16.0 * std::max({std::abs(worst.a), std::abs(worst.b), 1.0});
    if (worst.b - worst.a <= width_floor || mid <= worst.a || mid >= worst.b) {
      frozen_err += worst.error;
      if (frozen_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) &&
          queue.empty()) {
        break;
      }
      continue;
    }
    Panel left{worst.a, mid, 0.0, 0.0};
    Panel right{mid, worst.b, 0.0, 0.0};
    gk15_panel(f, left.a, left.b, left.value, left.error);
    gk15_panel(f, right.a, right.b, right.value, right.error);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++splits;
  }
  res.value = total;
  res.error_estimate = total_err;
  res.subdivisions = splits;
  if (!std::isfinite(total)) res.converged = false;
  return res;
}

}  // namespace qdetail

// Integral of fn over [a, b].  left_singularity in (-1, 0) declares
// fn(u) ~ (u - a)^alpha near a and triggers the removing substitution;
// values >= 0 need no treatment; values <= -1 are rejected (the integral
// would diverge).
template <class F>
inline QuadratureResult integrate(F&& fn, double a, double b,
                                  const QuadratureSpec& spec = {},
                                  std::optional<double> left_singularity = {}) {
  if (!(a <= b)) {
    throw std::invalid_argument("integrate: requires a <= b");
  }
  if (left_singularity) {
    const double alpha = *left_singularity;
    if (alpha <= -1.0) {
      throw std::invalid_argument(
          "integrate: singularity exponent must exceed -1 (got " +
          std::to_string(alpha) + ")");
    }
    if (alpha < 0.0) {
      const double gamma = 1.0 / (1.0 + alpha);
      const double vmax = std::pow(b - a, 1.0 + alpha);
      auto g = [&fn, a, gamma](double v) {
        const double u = a + std::pow(v, gamma);
        return fn(u) * gamma * std::pow(v, gamma - 1.0);
      };
      return qdetail::adapt_gk15(g, 0.0, vmax, spec);
    }
  }
  return qdetail::adapt_gk15(fn, a, b, spec);
}

struct Rect {
  double x0, x1, y0, y1;
};

// Kink line {(x, y): x - y = offset}.
struct RidgeLine {
  double offset;
};

namespace qdetail {

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
inline void gl_rule(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct GlRule {
  std::vector<double> nodes, weights;
  explicit GlRule(int n) { gl_rule(n, nodes, weights); }
};

inline const GlRule& gl12() {
  static const GlRule r(12);
  return r;
}
inline const GlRule& gl8() {
  static const GlRule r(8);
  return r;
}

template <class F>
inline double gl_tensor(const F& f, double x0, double x1, double y0, double y1,
                        const GlRule& rx, const GlRule& ry) {
  const double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
  const double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
  double sum = 0.0;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
    const double x = cx + hx * rx.nodes[i];
    double row = 0.0;
    for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
      row += ry.weights[j] * f(x, cy + hy * ry.nodes[j]);
    }
    sum += rx.weights[i] * row;
  }
  return sum * hx * hy;
}

struct Panel2 {
  double x0, x1, y0, y1, value, err, err_x, err_y;
  bool operator<(const Panel2& o) const { return err < o.err; }
};

template <class F>
inline Panel2 eval_panel2(const F& f, double x0, double x1, double y0,
                          double y1) {
  Panel2 p{x0, x1, y0, y1, 0.0, 0.0, 0.0, 0.0};
  p.value = gl_tensor(f, x0, x1, y0, y1, gl12(), gl12());
  const double vx = gl_tensor(f, x0, x1, y0, y1, gl8(), gl12());
  const double vy = gl_tensor(f, x0, x1, y0, y1, gl12(), gl8());
  p.err_x = std::abs(p.value - vx);
  p.err_y = std::abs(p.value - vy);
  p.err = p.err_x + p.err_y +
          std::numeric_limits<double>::epsilon() * 16.0 * std::abs(p.value);
  return p;
}

// Adaptive tensor-GL over a kink-free rectangle.  The split axis is the
// one whose embedded lower-order rule disagrees more.
template <class F>
inline QuadratureResult adapt_rect(const F& f, const Rect& r,
                                   const QuadratureSpec& spec) {
  QuadratureResult res;
  if (r.x0 >= r.x1 || r.y0 >= r.y1) {
    res.converged = true;
    return res;
  }
  std::priority_queue<Panel2> queue;
  Panel2 first = eval_panel2(f, r.x0, r.x1, r.y0, r.y1);
  double total = first.value;
  double total_err = first.err;
  queue.push(first);
  int splits = 0;
  const double eps = std::numeric_limits<double>::epsilon();
  while (true) {
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
    if (total_err <= tol) {
      res.converged = true;
      break;
    }
    if (splits >= spec.max_subdivisions || queue.empty()) break;
    Panel2 worst = queue.top();
    queue.pop();
    const bool split_x = worst.err_x >= worst.err_y;
    const double lo = split_x ? worst.x0 : worst.y0;
    const double hi = split_x ? worst.x1 : worst.y1;
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= eps * 16.0 * std::max({std::abs(lo), std::abs(hi), 1.0})) {
      continue;  // too narrow; error stays accounted for
    }
    Panel2 a = split_x ? eval_panel2(f, worst.x0, mid, worst.y0, worst.y1)
                       : eval_panel2(f, worst.x0, worst.x1, worst.y0, mid);
    Panel2 b = split_x ? eval_panel2(f, mid, worst.x1, worst.y0, worst.y1)
                       : eval_panel2(f, worst.x0, worst.x1, mid, worst.y1);
    total += a.value + b.value - worst.value;
    total_err += a.err + b.err - worst.err;
    queue.push(a);
    queue.push(b);
    ++splits;
  }
  res.value = total;
  res.error_estimate = total_err;
  res.subdivisions = splits;
  if (!std::isfinite(total)) res.converged = false;
  return res;
}

// Triangle pair covering the square whose main diagonal is the kink
// x - y = k.  Coordinates (w, x) with w the offset from the kink, so the
// |x - y|-type factor becomes a pure endpoint singularity of the outer
// 1-D integral and every inner integrand is smooth.
template <class F>
inline QuadratureResult diagonal_square(const F& f, double sx0, double sx1,
                                        double k,
                                        const QuadratureSpec& spec) {
  const double L = sx1 - sx0;
  QuadratureResult res;
  if (L <= 0.0) {
    res.converged = true;
    return res;
  }
  QuadratureSpec inner = spec;
  inner.rel_tol = std::max(spec.rel_tol * 0.05, 1e-13);
  inner.abs_tol = spec.abs_tol / (8.0 * std::max(L, 1.0));
  int subs = 0;
  bool ok = true;
  double err = 0.0;
  // below the kink: y = x - k - w
  auto h_low = [&](double w) {
    auto g = [&](double x) { return f(x, x - k - w); };
    QuadratureResult r = adapt_gk15(g, sx0 + w, sx1, inner);
    subs += r.subdivisions;
    return r.value;
  };
  // above the kink: y = x - k + w
  auto h_up = [&](double w) {
    auto g = [&](double x) { return f(x, x - k + w); };
    QuadratureResult r = adapt_gk15(g, sx0, sx1 - w, inner);
    subs += r.subdivisions;
    return r.value;
  };
  QuadratureSpec outer = spec;
  outer.abs_tol = spec.abs_tol * 0.5;
  QuadratureResult lo = adapt_gk15(h_low, 0.0, L, outer);
  QuadratureResult up = adapt_gk15(h_up, 0.0, L, outer);
  ok = lo.converged && up.converged;
  err = lo.error_estimate + up.error_estimate;
  res.value = lo.value + up.value;
  res.error_estimate = err;
  res.subdivisions = subs + lo.subdivisions + up.subdivisions;
  res.converged = ok && std::isfinite(res.value);
  return res;
}

}  // namespace qdetail

// Integral of fn over an axis-aligned rectangle.  A declared ridge is a
// line x - y = offset along which fn has a kink; the domain is split so
// no quadrature panel straddles it.
template <class F>
inline QuadratureResult integrate_2d(F&& fn, const Rect& dom,
                                     std::optional<RidgeLine> ridge = {},
                                     const QuadratureSpec& spec = {}) {
  if (!(dom.x0 <= dom.x1) || !(dom.y0 <= dom.y1)) {
    throw std::invalid_argument("integrate_2d: malformed rectangle");
  }
  QuadratureResult total;
  total.converged = true;
  if (dom.x0 == dom.x1 || dom.y0 == dom.y1) return total;

  std::vector<Rect> clean;
  double sq_x0 = 0.0, sq_x1 = 0.0, sq_k = 0.0;
  bool have_square = false;
  if (ridge) {
    const double k = ridge->offset;
    const double sx0 = std::max(dom.x0, dom.y0 + k);
    const double sx1 = std::min(dom.x1, dom.y1 + k);
    if (sx1 - sx0 > 0.0) {
      have_square = true;
      sq_x0 = sx0;
      sq_x1 = sx1;
      sq_k = k;
      const double sy0 = sx0 - k;
      const double sy1 = sx1 - k;
      if (dom.x0 < sx0) clean.push_back({dom.x0, sx0, dom.y0, dom.y1});
      if (sx1 < dom.x1) clean.push_back({sx1, dom.x1, dom.y0, dom.y1});
      if (dom.y0 < sy0) clean.push_back({sx0, sx1, dom.y0, sy0});
      if (sy1 < dom.y1) clean.push_back({sx0, sx1, sy1, dom.y1});
    }
  }
  if (!have_square) clean.push_back(dom);

  const double npieces = static_cast<double>(clean.size()) + (have_square ? 1 : 0);
  QuadratureSpec piece = spec;
  piece.abs_tol = spec.abs_tol / npieces;
  for (const Rect& r : clean) {
    QuadratureResult part = qdetail::adapt_rect(fn, r, piece);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.subdivisions += part.subdivisions;
    total.converged = total.converged && part.converged;
  }
  if (have_square) {
    QuadratureResult part =
        qdetail::diagonal_square(fn, sq_x0, sq_x1, sq_k, piece);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.subdivisions += part.subdivisions;
    total.converged = total.converged && part.converged;
  }
  if (!std::isfinite(total.value)) total.converged = false;
  return total;
}

}  // namespace wlgp
