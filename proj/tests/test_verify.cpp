#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "symgen/calculus.hpp"
#include "symgen/errors.hpp"
#include "symgen/infix.hpp"
#include "symgen/verify.hpp"

using namespace symgen;
using namespace symgen::build;

TEST_CASE("expression equivalence") {
  CHECK(expr_equiv(parse_infix("sin(2*x)"), parse_infix("2*sin(x)*cos(x)")).valid());
  CHECK(expr_equiv(parse_infix("(x + 1)^2"), parse_infix("x^2 + 2*x + 1")).valid());
  const Verdict bad = expr_equiv(parse_infix("sin(x)"), parse_infix("cos(x)"));
  CHECK(bad.outcome == Outcome::Invalid);
  CHECK(bad.failed_point.has_value());
  // no real point where both sides are defined
  CHECK(expr_equiv(parse_infix("sqrt(-1 - x^2)"), num(0)).outcome == Outcome::Undecidable);
}

TEST_CASE("the symbolic shortcut is reported as such") {
  const Verdict v = expr_equiv(x() + x(), 2 * x());
  CHECK(v.valid());
  CHECK(v.method == Method::SymbolicZero);
  ProbeConfig numeric;
  numeric.numeric_only = true;
  CHECK(expr_equiv(x() + x(), 2 * x(), numeric).method == Method::NumericProbe);
}

TEST_CASE("integration constants are probed") {
  CHECK(check_integral(parse_infix("cos(x)"), parse_infix("sin(x) + c")).valid());
  CHECK(expr_equiv(parse_infix("x + c"), parse_infix("x + 1")).outcome == Outcome::Invalid);
}

TEST_CASE("table integral pairs all verify") {
  for (const auto& p : fixtures::integral_pairs()) {
    CAPTURE(p.function);
    const Verdict v = check_integral(parse_infix(p.function), parse_infix(p.primitive));
    CHECK(v.valid());
  }
  CHECK_FALSE(check_integral(parse_infix("tan(x)"), parse_infix("log(cos(x))")).valid());
}

TEST_CASE("table ODE hypotheses all verify") {
  const Expression eq = parse_infix(fixtures::table_equation());
  for (const auto& h : fixtures::table_hypotheses()) {
    CAPTURE(h);
    CHECK(check_ode(eq, parse_infix(h.c_str()), 1).valid());
  }
  CHECK_FALSE(check_ode(eq, parse_infix("9*sqrt(x)/sqrt(c + x)"), 1).valid());
}

TEST_CASE("second-order checks use both constants") {
  CHECK(check_ode(parse_infix("y'' - y"), parse_infix("c1*exp(x) + c2*exp(-x)"), 2).valid());
  CHECK_FALSE(check_ode(parse_infix("y'' + y"), parse_infix("c1*exp(x) + c2*exp(-x)"), 2).valid());
}

TEST_CASE("probe configuration") {
  ProbeConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  const auto pts = probe_points(cfg);
  CHECK(pts.size() == static_cast<std::size_t>(cfg.probes * cfg.max_rounds));
  for (double p : pts) {
    CHECK(std::abs(p) >= cfg.x_min);
    CHECK(std::abs(p) <= cfg.x_max);
  }
  CHECK(probe_points(cfg) == pts);
  for (const auto& b : constant_assignments(cfg)) CHECK(b.get(Symbol::C1) != b.get(Symbol::C2));
  cfg.rel_tol = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = ProbeConfig{};
  cfg.x_min = 5;
  cfg.x_max = 1;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("batch verification with beam semantics") {
  std::istringstream in(
      "cos x\tsin x\n"
      "cos x\tcos x\n"
      "exp x\tx\n"
      "this is not prefix\tx\n"
      "- y' y\t* c exp x\tode1\n");
  const BatchReport r = verify_batch(in, {}, Task::Bwd);
  REQUIRE(r.lines.size() == 5);
  CHECK(r.lines[0].verdict.valid());
  CHECK_FALSE(r.lines[1].verdict.valid());
  CHECK(r.lines[3].malformed);
  CHECK(r.lines[4].verdict.valid());
  // cos x is solved by one of its two hypotheses; exp x is not; the malformed line is not a problem
  CHECK(r.problems == 3);
  CHECK(r.lines[3].problem_key.empty());
  CHECK(r.solved == 2);
  CHECK(r.accuracy() == doctest::Approx(2.0 / 3.0));

  std::ostringstream out;
  write_report(out, r);
  std::istringstream lines(out.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["line"] == ++n);
    CHECK(j.contains("outcome"));
    CHECK(j.contains("method"));
  }
  CHECK(n == 5);
}

TEST_CASE("task names") {
  for (Task t : {Task::Fwd, Task::Bwd, Task::Ibp, Task::Ode1, Task::Ode2}) CHECK(task_from_string(to_string(t)) == t);
  CHECK_FALSE(task_from_string("ode3").has_value());
}

TEST_CASE("narrow domains are still decidable") {
  // defined only for 2 < x < 4
  const Verdict v = check_integral(parse_infix("1/sqrt(1 - (x - 3)^2)"), parse_infix("asin(x - 3)"));
  CHECK(v.valid());
  CHECK(check_integral(parse_infix("1/sqrt(1 - (x - 3)^2)"), parse_infix("acos(x - 3)")).outcome == Outcome::Invalid);
  // defined only for 7.9 < x < 8.1
  CHECK(expr_equiv(parse_infix("x*sqrt(1 - 100*(x - 8)^2)"), parse_infix("sqrt(1 - 100*(x - 8)^2)*x")).valid());
}

TEST_CASE("rounding in double precision is not a mismatch") {
  // 6y - y^2 - 8 = sech^2 cancels badly where tanh is close to 1
  const Expression eq = parse_prefix("- / y' - - * + 6 y pow y + 2 + 8 + 1");
  CHECK(check_ode(eq, parse_infix("tanh(x + c + 1) + 3"), 1).valid());
  CHECK_FALSE(check_ode(eq, parse_infix("tanh(x + c + 1) + 2"), 1).valid());
}
