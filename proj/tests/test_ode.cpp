#include "doctest.h"
#include "symgen/errors.hpp"
#include "symgen/infix.hpp"
#include "symgen/ode.hpp"
#include "symgen/simplify.hpp"

using namespace symgen;
using namespace symgen::build;

TEST_CASE("first-order example from x log(c/x)") {
  OdeConfig cfg;
  OdeCounters counters;
  const auto ex = ode1_from_solution(parse_infix("x*log(c/x)"), cfg, counters);
  REQUIRE(ex.has_value());
  CHECK(ex->equation == normalize_equation(parse_infix("x*y' - y + x")));
  CHECK(check_ode(ex->equation, ex->solution, 1).valid());
}

TEST_CASE("second-order example from c1 exp(x) + c2 exp(-x)") {
  OdeConfig cfg;
  OdeCounters counters;
  const auto ex = ode2_from_solution(parse_infix("c1*exp(x) + c2*exp(-x)"), cfg, counters);
  REQUIRE(ex.has_value());
  CHECK(ex->equation == normalize_equation(parse_infix("y'' - y")));
  CHECK(check_ode(ex->equation, ex->solution, 2).valid());
  CHECK(counters.c1_attempts == 1);
  CHECK(counters.c1_skipped == 0);
}

TEST_CASE("solving for a planted constant inverts the path") {
  const auto s = solve_for_symbol(parse_infix("x*log(c/x)"), y(), Symbol::C);
  CHECK(expr_equiv(s.expr, parse_infix("x*exp(y/x)")).valid());
  CHECK_FALSE(s.trace.empty());
  CHECK_THROWS_AS(solve_for_symbol(parse_infix("c*x + c"), y(), Symbol::C), MultipleOccurrences);
  CHECK_THROWS_AS(solve_for_symbol(parse_infix("x^2"), y(), Symbol::C), NotInvertiblePath);
}

TEST_CASE("planting replaces exactly one leaf") {
  Rng rng(1);
  const Expression f = parse_infix("x*sin(3*x) + 2");
  for (int i = 0; i < 30; ++i) {
    const Expression p = plant_constant(f, Symbol::C, rng);
    CHECK(count_occurrences(p, Symbol::C) == 1);
    CHECK(p.node_count() == f.node_count());
  }
}

TEST_CASE("generated equations are satisfied by their solutions") {
  OdeConfig cfg;
  const SubtreeTable table = build_tables(TreeMode::UnaryBinary, 15, cfg.grammar);
  for (int order : {1, 2}) {
    Rng rng(order * 101);
    OdeCounters counters;
    std::vector<OdeExample> out;
    gen_odes(order, order == 1 ? 40 : 10, cfg, table, rng, [&](const OdeExample& e) { out.push_back(e); }, counters);
    CHECK(out.size() == (order == 1 ? 40u : 10u));
    std::set<std::string> keys;
    for (const auto& e : out) {
      CAPTURE(to_prefix_string(e.equation));
      CHECK(e.order == order);
      CHECK(keys.insert(to_prefix_string(e.equation)).second);
      CHECK(e.equation.token_length() <= 512);
      CHECK(e.equation.contains(order == 1 ? Symbol::Dy : Symbol::D2y));
      ProbeConfig other;
      other.seed = 99;
      CHECK(check_ode(e.equation, e.solution, order, other).valid());
    }
    CHECK(counters.emitted == out.size());
  }
}

TEST_CASE("generation is deterministic and validates its order") {
  OdeConfig cfg;
  const SubtreeTable table = build_tables(TreeMode::UnaryBinary, 15, cfg.grammar);
  auto run = [&](std::uint64_t seed) {
    Rng rng(seed);
    OdeCounters counters;
    std::vector<std::string> out;
    gen_odes(1, 10, cfg, table, rng, [&](const OdeExample& e) { out.push_back(to_prefix_string(e.equation)); }, counters);
    return out;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
  Rng rng(0);
  OdeCounters counters;
  CHECK_THROWS_AS(gen_odes(3, 1, cfg, table, rng, [](const OdeExample&) {}, counters), InvalidConfig);
}

TEST_CASE("retries are bounded") {
  OdeConfig cfg;
  cfg.max_tokens = 3;
  cfg.max_rejections = 50;
  const SubtreeTable table = build_tables(TreeMode::UnaryBinary, 15, cfg.grammar);
  Rng rng(0);
  OdeCounters counters;
  CHECK_THROWS_AS(gen_odes(1, 5, cfg, table, rng, [](const OdeExample&) {}, counters), RetriesExhausted);
}
