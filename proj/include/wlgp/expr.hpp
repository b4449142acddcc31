#pragma once

// Weight-function expressions over the variable `u`.
//
// Grammar: numeric literals, `u`, binary + - * / ^, unary minus, the
// functions exp/log/sin/cos/sqrt/abs, parentheses.  Precedence from
// loosest to tightest: + - , * / , unary - , ^ ; and ^ associates to
// the right, so 2^3^2 = 512 and -u^2 = -(u^2) while u^-2 is accepted.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wlgp/quadrature.hpp"

namespace wlgp {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at offset " + std::to_string(pos) + ")"),
        pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeightExpr;
using ExprPtr = std::shared_ptr<const WeightExpr>;

struct WeightExpr {
  enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };
  Kind kind;
  double value = 0.0;  // number
  std::string func;    // call
  ExprPtr lhs, rhs;    // negate/call use lhs only
};

inline ExprPtr make_number(double v) {
  return std::make_shared<WeightExpr>(WeightExpr{WeightExpr::Kind::number, v});
}
inline ExprPtr make_variable() {
  return std::make_shared<WeightExpr>(
      WeightExpr{WeightExpr::Kind::variable});
}
inline ExprPtr make_node(WeightExpr::Kind k, ExprPtr l, ExprPtr r = nullptr) {
  WeightExpr e{k};
  e.lhs = std::move(l);
  e.rhs = std::move(r);
  return std::make_shared<WeightExpr>(std::move(e));
}
inline ExprPtr make_call(std::string name, ExprPtr arg) {
  WeightExpr e{WeightExpr::Kind::call};
  e.func = std::move(name);
  e.lhs = std::move(arg);
  return std::make_shared<WeightExpr>(std::move(e));
}

namespace exprdetail {

inline bool known_function(std::string_view name) {
  return name == "exp" || name == "log" || name == "sin" || name == "cos" ||
         name == "sqrt" || name == "abs";
}

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool consume(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  ExprPtr parse_expr() {
    ExprPtr left = parse_term();
    while (true) {
      const char c = peek();
      if (c == '+' || c == '-') {
        ++pos;
        ExprPtr right = parse_term();
        left = make_node(c == '+' ? WeightExpr::Kind::add
                                  : WeightExpr::Kind::sub,
                         std::move(left), std::move(right));
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr left = parse_unary();
    while (true) {
      const char c = peek();
      if (c == '*' || c == '/') {
        ++pos;
        ExprPtr right = parse_unary();
        left = make_node(c == '*' ? WeightExpr::Kind::mul
                                  : WeightExpr::Kind::div,
                         std::move(left), std::move(right));
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_unary() {
    if (peek() == '-') {
      ++pos;
      return make_node(WeightExpr::Kind::negate, parse_unary());
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (peek() == '^') {
      ++pos;
      // the exponent re-enters at unary level: u^-2 parses, ^ stays
      // right-associative
      ExprPtr exponent = parse_unary();
      return make_node(WeightExpr::Kind::pow, std::move(base),
                       std::move(exponent));
    }
    return base;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unexpected end of input", pos);
    const char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_identifier();
    }
    if (c == '(') {
      ++pos;
      ExprPtr inner = parse_expr();
      if (!consume(')')) throw ParseError("expected ')'", pos);
      return inner;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }

  ExprPtr parse_number() {
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{}) throw ParseError("malformed number", pos);
    pos = static_cast<std::size_t>(ptr - text.data());
    return make_number(v);
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_'))
      ++pos;
    const std::string_view name = text.substr(start, pos - start);
    if (name == "u") return make_variable();
    if (known_function(name)) {
      if (!consume('(')) {
        throw ParseError("function '" + std::string(name) +
                             "' requires parenthesized argument",
                         pos);
      }
      ExprPtr arg = parse_expr();
      if (!consume(')')) throw ParseError("expected ')'", pos);
      return make_call(std::string(name), std::move(arg));
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }
};

}  // namespace exprdetail

inline ExprPtr parse_weight(std::string_view text) {
  exprdetail::Parser p{text};
  ExprPtr e = p.parse_expr();
  if (!p.at_end()) {
    throw ParseError("trailing input", p.pos);
  }
  return e;
}

// Raw evaluation; subexpressions may go negative, domain violations throw.
inline double eval(const WeightExpr& e, double u) {
  using K = WeightExpr::Kind;
  switch (e.kind) {
    case K::number:
      return e.value;
    case K::variable:
      return u;
    case K::negate:
      return -eval(*e.lhs, u);
    case K::add:
      return eval(*e.lhs, u) + eval(*e.rhs, u);
    case K::sub:
      return eval(*e.lhs, u) - eval(*e.rhs, u);
    case K::mul:
      return eval(*e.lhs, u) * eval(*e.rhs, u);
    case K::div: {
      const double den = eval(*e.rhs, u);
      if (den == 0.0) throw EvalError("division by zero at u=" + std::to_string(u));
      return eval(*e.lhs, u) / den;
    }
    case K::pow: {
      const double base = eval(*e.lhs, u);
      const double expo = eval(*e.rhs, u);
      if (base == 0.0 && expo < 0.0)
        throw EvalError("zero raised to negative power at u=" + std::to_string(u));
      if (base < 0.0 && expo != std::floor(expo))
        throw EvalError("negative base with fractional exponent at u=" +
                        std::to_string(u));
      return std::pow(base, expo);
    }
    case K::call: {
      const double a = eval(*e.lhs, u);
      if (e.func == "exp") return std::exp(a);
      if (e.func == "log") {
        if (a <= 0.0)
          throw EvalError("log of non-positive value at u=" + std::to_string(u));
        return std::log(a);
      }
      if (e.func == "sin") return std::sin(a);
      if (e.func == "cos") return std::cos(a);
      if (e.func == "sqrt") {
        if (a < 0.0)
          throw EvalError("sqrt of negative value at u=" + std::to_string(u));
        return std::sqrt(a);
      }
      if (e.func == "abs") return std::abs(a);
      throw EvalError("unknown function '" + e.func + "'");
    }
  }
  throw EvalError("corrupt expression node");
}

// Weight evaluation: like eval, but a negative result is a hard error
// (weights must be pointwise nonnegative).
inline double eval_weight(const WeightExpr& e, double u) {
  const double v = eval(e, u);
  if (v < 0.0) {
    throw EvalError("weight is negative at u=" + std::to_string(u) +
                    " (value " + std::to_string(v) + ")");
  }
  if (!std::isfinite(v)) {
    // allow a bare +inf only at the singular origin
    if (!(u == 0.0 && v > 0.0))
      throw EvalError("weight is not finite at u=" + std::to_string(u));
  }
  return v;
}

inline bool structurally_equal(const WeightExpr& a, const WeightExpr& b) {
  if (a.kind != b.kind) return false;
  using K = WeightExpr::Kind;
  switch (a.kind) {
    case K::number:
      return a.value == b.value;
    case K::variable:
      return true;
    case K::call:
      if (a.func != b.func) return false;
      return structurally_equal(*a.lhs, *b.lhs);
    case K::negate:
      return structurally_equal(*a.lhs, *b.lhs);
    default:
      return structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
  }
}

namespace exprdetail {

// printing levels: + - (1), * / (2), unary - (3), ^ (4), atoms (5)
inline int level(const WeightExpr& e) {
  using K = WeightExpr::Kind;
  switch (e.kind) {
    case K::add:
    case K::sub:
      return 1;
    case K::mul:
    case K::div:
      return 2;
    case K::negate:
      return 3;
    case K::pow:
      return 4;
    default:
      return 5;
  }
}

inline std::string shortest_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    (void)ptr;
    if (ec == std::errc{} && back == v) break;
  }
  return buf;
}

inline void print_node(const WeightExpr& e, std::string& out, int min_level);

inline void print_child(const ExprPtr& c, std::string& out, int min_level) {
  const bool parens = level(*c) < min_level;
  if (parens) out += '(';
  print_node(*c, out, 0);
  if (parens) out += ')';
}

inline void print_node(const WeightExpr& e, std::string& out, int) {
  using K = WeightExpr::Kind;
  switch (e.kind) {
    case K::number:
      out += shortest_double(e.value);
      return;
    case K::variable:
      out += 'u';
      return;
    case K::negate:
      out += '-';
      print_child(e.lhs, out, 4);
      return;
    case K::add:
    case K::sub:
      print_child(e.lhs, out, 1);
      out += (e.kind == K::add) ? '+' : '-';
      print_child(e.rhs, out, 2);
      return;
    case K::mul:
    case K::div:
      print_child(e.lhs, out, 2);
      out += (e.kind == K::mul) ? '*' : '/';
      print_child(e.rhs, out, 4);
      return;
    case K::pow:
      print_child(e.lhs, out, 5);
      out += '^';
      // exponent may be a bare unary chain; anything looser needs parens
      print_child(e.rhs, out, 3);
      return;
    case K::call:
      out += e.func;
      out += '(';
      print_node(*e.lhs, out, 0);
      out += ')';
      return;
  }
}

}  // namespace exprdetail

inline std::string print_weight(const WeightExpr& e) {
  std::string out;
  exprdetail::print_node(e, out, 0);
  return out;
}

// Result of probing integrability of the weight near the origin.
struct IntegrabilityCheck {
  bool ok = false;
  double integral = 0.0;
  double error_estimate = 0.0;
  std::string message;
};

// Estimates the integral of the weight over [0, delta].  A weight whose
// integral near 0 diverges (or that turns negative, or hits a domain
// error) yields ok = false with a diagnostic message.
inline IntegrabilityCheck check_integrability(
    const WeightExpr& e, double delta,
    std::optional<double> singularity_hint = {},
    const QuadratureSpec& spec = {}) {
  IntegrabilityCheck out;
  if (!(delta > 0.0)) {
    out.message = "delta must be positive";
    return out;
  }
  try {
    auto f = [&e](double u) { return eval_weight(e, u); };
    QuadratureResult r = integrate(f, 0.0, delta, spec, singularity_hint);
    if (!r.converged) {
      out.message =
          "integral over (0, delta] did not converge; the weight appears "
          "non-integrable at the origin";
      return out;
    }
    out.ok = true;
    out.integral = r.value;
    out.error_estimate = r.error_estimate;
  } catch (const EvalError& err) {
    out.message = err.what();
  }
  return out;
}

}  // namespace wlgp
