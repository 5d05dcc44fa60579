#include "symgen/calculus.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/special_functions/acosh.hpp>
#include <boost/math/special_functions/asinh.hpp>
#include <boost/math/special_functions/atanh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "symgen/errors.hpp"
#include "symgen/simplify.hpp"

namespace symgen {

EvalResult EvalResult::real(double v) {
  EvalResult r;
  if (std::isnan(v)) {
    r.kind = Kind::NaN;
  } else if (std::isinf(v)) {
    r.kind = v > 0 ? Kind::PosInf : Kind::NegInf;
  } else {
    r.value = v;
    r.max_magnitude = std::abs(v);
  }
  return r;
}

EvalResult EvalResult::failure(Kind k) {
  EvalResult r;
  r.kind = k;
  r.value = std::numeric_limits<double>::quiet_NaN();
  return r;
}

Bindings::Bindings() {
  set(Symbol::E, std::numbers::e);
  set(Symbol::Pi, std::numbers::pi);
}

Bindings& Bindings::set(Symbol s, double v) {
  values_[static_cast<int>(s)] = v;
  bound_[static_cast<int>(s)] = true;
  return *this;
}

std::optional<double> Bindings::get(Symbol s) const {
  if (!bound_[static_cast<int>(s)]) return std::nullopt;
  return values_[static_cast<int>(s)];
}

void Bindings::unset(Symbol s) { bound_[static_cast<int>(s)] = false; }

namespace {

using K = EvalResult::Kind;

EvalResult apply_unary(Op op, double a) {
  switch (op) {
    case Op::Exp: return EvalResult::real(std::exp(a));
    case Op::Log:
      if (a < 0) return EvalResult::failure(K::Complex);
      if (a == 0) return EvalResult::failure(K::NegInf);
      return EvalResult::real(std::log(a));
    case Op::Sqrt:
      if (a < 0) return EvalResult::failure(K::Complex);
      return EvalResult::real(std::sqrt(a));
    case Op::Sin: return EvalResult::real(std::sin(a));
    case Op::Cos: return EvalResult::real(std::cos(a));
    case Op::Tan: return EvalResult::real(std::tan(a));
    case Op::Asin:
      if (a < -1 || a > 1) return EvalResult::failure(K::Complex);
      return EvalResult::real(std::asin(a));
    case Op::Acos:
      if (a < -1 || a > 1) return EvalResult::failure(K::Complex);
      return EvalResult::real(std::acos(a));
    case Op::Atan: return EvalResult::real(std::atan(a));
    case Op::Sinh: return EvalResult::real(std::sinh(a));
    case Op::Cosh: return EvalResult::real(std::cosh(a));
    case Op::Tanh: return EvalResult::real(std::tanh(a));
    case Op::Asinh: return EvalResult::real(std::asinh(a));
    case Op::Acosh:
      if (a < 1) return EvalResult::failure(K::Complex);
      return EvalResult::real(std::acosh(a));
    case Op::Atanh:
      if (a <= -1 || a >= 1) return EvalResult::failure(std::abs(a) == 1 ? (a > 0 ? K::PosInf : K::NegInf) : K::Complex);
      return EvalResult::real(std::atanh(a));
    default: return EvalResult::failure(K::DomainError);
  }
}

EvalResult apply_pow(double a, double b) {
  if (a < 0 && b != std::floor(b)) return EvalResult::failure(K::Complex);
  if (a == 0 && b < 0) return EvalResult::failure(K::PosInf);
  return EvalResult::real(std::pow(a, b));
}

EvalResult apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return EvalResult::real(a + b);
    case Op::Sub: return EvalResult::real(a - b);
    case Op::Mul: return EvalResult::real(a * b);
    case Op::Div:
      if (b == 0) return EvalResult::failure(a == 0 ? K::NaN : (a > 0 ? K::PosInf : K::NegInf));
      return EvalResult::real(a / b);
    case Op::Pow: return apply_pow(a, b);
    default: return EvalResult::failure(K::DomainError);
  }
}

EvalResult eval_rec(const Expression& e, const Bindings& b) {
  switch (e.kind()) {
    case Expression::Kind::Integer: return EvalResult::real(e.value().convert_to<double>());
    case Expression::Kind::Symbol: {
      auto v = b.get(e.symbol());
      if (!v) return EvalResult::failure(K::DomainError);
      return EvalResult::real(*v);
    }
    case Expression::Kind::Unary: {
      EvalResult a = eval_rec(e.arg(), b);
      if (!a.finite()) return a;
      EvalResult r = apply_unary(e.op(), a.value);
      if (r.finite()) r.max_magnitude = std::max(r.max_magnitude, a.max_magnitude);
      return r;
    }
    case Expression::Kind::Binary: {
      EvalResult l = eval_rec(e.lhs(), b);
      if (!l.finite()) return l;
      EvalResult r = eval_rec(e.rhs(), b);
      if (!r.finite()) return r;
      EvalResult out = apply_binary(e.op(), l.value, r.value);
      if (out.finite()) out.max_magnitude = std::max({out.max_magnitude, l.max_magnitude, r.max_magnitude});
      return out;
    }
  }
  return EvalResult::failure(K::DomainError);
}

using Precise = boost::multiprecision::cpp_bin_float_50;

// Same domain rules as apply_unary/apply_binary; nullopt for anything but a finite real.
std::optional<Precise> eval_precise(const Expression& e, const Bindings& b) {
  using std::abs;
  switch (e.kind()) {
    case Expression::Kind::Integer: return Precise(e.value());
    case Expression::Kind::Symbol: {
      auto v = b.get(e.symbol());
      if (!v) return std::nullopt;
      return Precise(*v);
    }
    case Expression::Kind::Unary: {
      auto a = eval_precise(e.arg(), b);
      if (!a) return std::nullopt;
      const Precise& v = *a;
      switch (e.op()) {
        case Op::Exp: return exp(v);
        case Op::Log:
          if (v <= 0) return std::nullopt;
          return log(v);
        case Op::Sqrt:
          if (v < 0) return std::nullopt;
          return sqrt(v);
        case Op::Sin: return sin(v);
        case Op::Cos: return cos(v);
        case Op::Tan: return tan(v);
        case Op::Asin:
          if (v < -1 || v > 1) return std::nullopt;
          return asin(v);
        case Op::Acos:
          if (v < -1 || v > 1) return std::nullopt;
          return acos(v);
        case Op::Atan: return atan(v);
        case Op::Sinh: return sinh(v);
        case Op::Cosh: return cosh(v);
        case Op::Tanh: return tanh(v);
        case Op::Asinh: return boost::math::asinh(v);
        case Op::Acosh:
          if (v < 1) return std::nullopt;
          return boost::math::acosh(v);
        case Op::Atanh:
          if (v <= -1 || v >= 1) return std::nullopt;
          return boost::math::atanh(v);
        default: return std::nullopt;
      }
    }
    case Expression::Kind::Binary: {
      auto l = eval_precise(e.lhs(), b);
      if (!l) return std::nullopt;
      auto r = eval_precise(e.rhs(), b);
      if (!r) return std::nullopt;
      switch (e.op()) {
        case Op::Add: return *l + *r;
        case Op::Sub: return *l - *r;
        case Op::Mul: return *l * *r;
        case Op::Div:
          if (*r == 0) return std::nullopt;
          return *l / *r;
        case Op::Pow:
          if (*l < 0 && *r != floor(*r)) return std::nullopt;
          if (*l == 0 && *r < 0) return std::nullopt;
          if (*l == 0 && *r == 0) return Precise(1);
          return pow(*l, *r);
        default: return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

using namespace build;

bool is_zero(const Expression& e) { return e.is_integer(0); }
bool is_one(const Expression& e) { return e.is_integer(1); }

// Light local folding keeps raw derivatives from exploding before simplify.
Expression add(const Expression& a, const Expression& b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return a + b;
}
Expression sub(const Expression& a, const Expression& b) {
  if (is_zero(b)) return a;
  if (is_zero(a)) return neg(b);
  return a - b;
}
Expression mul(const Expression& a, const Expression& b) {
  if (is_zero(a) || is_zero(b)) return num(0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  return a * b;
}
Expression div(const Expression& a, const Expression& b) {
  if (is_zero(a)) return num(0);
  if (is_one(b)) return a;
  return a / b;
}

bool depends_on(const Expression& e, Symbol var, bool y_dep) {
  if (e.contains(var)) return true;
  return y_dep && (e.contains(Symbol::Y) || e.contains(Symbol::Dy) || e.contains(Symbol::D2y));
}

// Derivative of f at u, times nothing (chain factor applied by caller).
Expression unary_derivative(Op op, const Expression& u) {
  switch (op) {
    case Op::Exp: return exp(u);
    case Op::Log: return div(num(1), u);
    case Op::Sqrt: return div(num(1), mul(num(2), sqrt(u)));
    case Op::Sin: return cos(u);
    case Op::Cos: return neg(sin(u));
    case Op::Tan: return add(num(1), pow(tan(u), 2));
    case Op::Asin: return div(num(1), sqrt(sub(num(1), pow(u, 2))));
    case Op::Acos: return neg(div(num(1), sqrt(sub(num(1), pow(u, 2)))));
    case Op::Atan: return div(num(1), add(num(1), pow(u, 2)));
    case Op::Sinh: return cosh(u);
    case Op::Cosh: return sinh(u);
    case Op::Tanh: return sub(num(1), pow(tanh(u), 2));
    case Op::Asinh: return div(num(1), sqrt(add(pow(u, 2), num(1))));
    case Op::Acosh: return div(num(1), sqrt(sub(pow(u, 2), num(1))));
    case Op::Atanh: return div(num(1), sub(num(1), pow(u, 2)));
    default: throw UnsupportedOperator(std::string("no derivative rule for ") + std::string(token(op)));
  }
}

Expression d_rec(const Expression& e, Symbol var, bool y_dep) {
  if (!depends_on(e, var, y_dep)) return num(0);
  switch (e.kind()) {
    case Expression::Kind::Integer: return num(0);
    case Expression::Kind::Symbol: {
      const Symbol s = e.symbol();
      if (s == var) return num(1);
      if (y_dep) {
        if (s == Symbol::Y) return dy();
        if (s == Symbol::Dy) return d2y();
        if (s == Symbol::D2y) throw UnsupportedOperator("derivative of y'' is outside the vocabulary");
      }
      return num(0);
    }
    case Expression::Kind::Unary: {
      const Expression du = d_rec(e.arg(), var, y_dep);
      return mul(unary_derivative(e.op(), e.arg()), du);
    }
    case Expression::Kind::Binary: break;
  }
  const Expression& a = e.lhs();
  const Expression& b = e.rhs();
  switch (e.op()) {
    case Op::Add: return add(d_rec(a, var, y_dep), d_rec(b, var, y_dep));
    case Op::Sub: return sub(d_rec(a, var, y_dep), d_rec(b, var, y_dep));
    case Op::Mul: return add(mul(d_rec(a, var, y_dep), b), mul(a, d_rec(b, var, y_dep)));
    case Op::Div: {
      const Expression da = d_rec(a, var, y_dep);
      const Expression db = d_rec(b, var, y_dep);
      return div(sub(mul(da, b), mul(a, db)), pow(b, 2));
    }
    case Op::Pow: {
      const Expression da = d_rec(a, var, y_dep);
      if (!depends_on(b, var, y_dep)) {
        if (b.is_integer()) {
          const BigInt k = b.value();
          Expression lowered = k == 2 ? a : pow(a, Expression::integer(BigInt(k - 1)));
          return mul(mul(b, lowered), da);
        }
        return mul(mul(b, pow(a, sub(b, num(1)))), da);
      }
      const Expression db = d_rec(b, var, y_dep);
      // d(a^b) = a^b (b' log a + b a'/a)
      return mul(e, add(mul(db, log(a)), div(mul(b, da), a)));
    }
    default: break;
  }
  throw UnsupportedOperator("unknown binary operator");
}

}  // namespace

EvalResult evaluate(const Expression& e, const Bindings& b) { return eval_rec(e, b); }

std::optional<double> evaluate_precise(const Expression& e, const Bindings& b) {
  std::optional<Precise> v;
  try {
    v = eval_precise(e, b);
  } catch (const std::exception&) {
    // boost::math reports overflow and NaN arguments by throwing
    return std::nullopt;
  }
  if (!v || !boost::multiprecision::isfinite(*v)) return std::nullopt;
  const double d = v->convert_to<double>();
  if (!std::isfinite(d)) return std::nullopt;
  return d;
}

Expression differentiate_raw(const Expression& e, Symbol var, bool y_depends_on_var) {
  return d_rec(e, var, y_depends_on_var);
}

Expression differentiate(const Expression& e, Symbol var) { return simplify(d_rec(e, var, false)); }

Expression total_derivative(const Expression& e) {
  if (e.contains(Symbol::D2y)) throw UnsupportedOperator("derivative of y'' is outside the vocabulary");
  return simplify(d_rec(e, Symbol::X, true));
}

std::vector<double> default_constant_probes() { return {0.5, 1.0, 2.0}; }

namespace {

bool constant_subtrees_valid(const Expression& e, const std::vector<Bindings>& assignments) {
  if (!depends_on_variables(e)) {
    for (const Bindings& b : assignments) {
      if (!evaluate(e, b).finite()) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < e.arity(); ++i) {
    if (!constant_subtrees_valid(e.child(i), assignments)) return false;
  }
  return true;
}

}  // namespace

bool is_valid_expression(const Expression& e, const std::vector<double>& constant_probes) {
  std::vector<Bindings> assignments;
  const std::vector<double> values = constant_probes.empty() ? std::vector<double>{1.0} : constant_probes;
  for (double v : values) {
    Bindings b;
    b.set(Symbol::C, v).set(Symbol::C1, v).set(Symbol::C2, v);
    assignments.push_back(b);
  }
  return constant_subtrees_valid(e, assignments);
}

double finite_difference(const Expression& e, Symbol var, double point, double h, Bindings b) {
  b.set(var, point + h);
  const EvalResult hi = evaluate(e, b);
  b.set(var, point - h);
  const EvalResult lo = evaluate(e, b);
  if (!hi.finite() || !lo.finite()) throw ProbeFailed("function not finite around the probe point");
  return (hi.value - lo.value) / (2 * h);
}

}  // namespace symgen
