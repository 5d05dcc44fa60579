#include <cmath>

#include "doctest.h"
#include "symgen/calculus.hpp"
#include "symgen/errors.hpp"
#include "symgen/infix.hpp"
#include "symgen/sampler.hpp"
#include "symgen/simplify.hpp"
#include "symgen/verify.hpp"

using namespace symgen;
using namespace symgen::build;

namespace {

double at(const Expression& e, double xv) {
  Bindings b;
  b.set(Symbol::X, xv);
  return evaluate(e, b).value;
}

bool same(const Expression& a, const Expression& b) { return expr_equiv(a, b).valid(); }

}  // namespace

TEST_CASE("evaluation over the reals") {
  CHECK(at(parse_infix("x^2 + 3*x"), 2.0) == doctest::Approx(10.0));
  Bindings b;
  b.set(Symbol::X, -1.0);
  CHECK(evaluate(log(x()), b).kind == EvalResult::Kind::Complex);
  CHECK(evaluate(sqrt(x()), b).kind == EvalResult::Kind::Complex);
  CHECK_FALSE(evaluate(num(1) / (x() + 1), b).finite());
  CHECK(evaluate(asin(num(2)), b).kind == EvalResult::Kind::Complex);
  CHECK(evaluate(y(), b).kind == EvalResult::Kind::DomainError);
  CHECK(evaluate(sym(Symbol::Pi), b).value == doctest::Approx(M_PI));
  // principal branch: negative base with a fractional exponent
  CHECK(evaluate(pow(num(-8), num(1) / 3), b).kind == EvalResult::Kind::Complex);
  CHECK(evaluate(pow(num(-2), num(3)), b).value == doctest::Approx(-8.0));
}

TEST_CASE("50-digit evaluation") {
  Bindings b;
  b.set(Symbol::X, 0.5);
  CHECK(*evaluate_precise(parse_infix("atanh(tanh(x))"), b) == doctest::Approx(0.5));
  b.set(Symbol::X, -1.0);
  CHECK_FALSE(evaluate_precise(parse_infix("log(x)"), b).has_value());
  // tanh rounds to within an ulp of 1; not a real value, never an exception
  b.set(Symbol::X, 59.0);
  CHECK_NOTHROW(evaluate_precise(parse_infix("atanh(tanh(x))"), b));
}

TEST_CASE("derivative table") {
  struct Row {
    const char* f;
    const char* df;
  };
  const Row rows[] = {
      {"x^3", "3*x^2"},
      {"exp(2*x)", "2*exp(2*x)"},
      {"log(x)", "1/x"},
      {"sqrt(x)", "1/(2*sqrt(x))"},
      {"sin(x)", "cos(x)"},
      {"cos(x)", "-sin(x)"},
      {"tan(x)", "1 + tan(x)^2"},
      {"asin(x)", "1/sqrt(1 - x^2)"},
      {"acos(x)", "-1/sqrt(1 - x^2)"},
      {"atan(x)", "1/(1 + x^2)"},
      {"sinh(x)", "cosh(x)"},
      {"cosh(x)", "sinh(x)"},
      {"tanh(x)", "1 - tanh(x)^2"},
      {"asinh(x)", "1/sqrt(x^2 + 1)"},
      {"acosh(x)", "1/sqrt(x^2 - 1)"},
      {"atanh(x)", "1/(1 - x^2)"},
      {"x^x", "x^x*(log(x) + 1)"},
      {"x/(x + 1)", "1/(x + 1)^2"},
      {"x + sin(x) + tan(x)", "cos(x) + tan(x)^2 + 2"},
  };
  for (const auto& r : rows) {
    CAPTURE(r.f);
    CHECK(same(differentiate(parse_infix(r.f), Symbol::X), parse_infix(r.df)));
  }
}

TEST_CASE("other symbols are constants") {
  CHECK(simplify(differentiate(c() * x(), Symbol::X)) == c());
  CHECK(differentiate(y() + c(), Symbol::X) == num(0));
  CHECK(simplify(differentiate(x() * y(), Symbol::Y)) == x());
}

TEST_CASE("total derivative treats y as a function of x") {
  CHECK(same(total_derivative(x() * y()), y() + x() * dy()));
  CHECK(same(total_derivative(dy() * dy()), 2 * dy() * d2y()));
  CHECK_THROWS_AS(total_derivative(d2y()), UnsupportedOperator);
}

TEST_CASE("symbolic derivative agrees with finite differences on random functions") {
  const GrammarConfig g = GrammarConfig::dataset_default();
  const SubtreeTable table = build_tables(TreeMode::UnaryBinary, 15, g);
  Rng rng(11);
  std::size_t agree = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    const Expression f = sample_function(g, table, rng);
    const Expression df = differentiate(f, Symbol::X);
    for (double p : {0.3, 0.7, 1.9}) {
      double fd;
      try {
        fd = finite_difference(f, Symbol::X, p, 1e-6 * std::max(1.0, std::abs(p)));
      } catch (const ProbeFailed&) {
        continue;
      }
      Bindings b;
      b.set(Symbol::X, p);
      const EvalResult sym = evaluate(df, b);
      if (!sym.finite() || std::abs(sym.value) > 1e4 || sym.max_magnitude > 1e6) continue;
      ++total;
      if (std::abs(sym.value - fd) <= 1e-4 * std::max(1.0, std::abs(sym.value))) ++agree;
    }
  }
  REQUIRE(total > 200);
  CHECK(static_cast<double>(agree) >= 0.99 * static_cast<double>(total));
}

TEST_CASE("validity of constant subtrees") {
  CHECK(is_valid_expression(parse_infix("x + log(2)")));
  CHECK_FALSE(is_valid_expression(parse_infix("x + log(-2)")));
  CHECK_FALSE(is_valid_expression(parse_infix("x + 1/0")));
  CHECK(is_valid_expression(parse_infix("log(-x)")));
  CHECK_FALSE(is_valid_expression(parse_infix("x*sqrt(c - 3)")));
  CHECK(is_valid_expression(parse_infix("x*exp(c)")));
}
