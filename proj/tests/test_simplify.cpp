#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "symgen/calculus.hpp"
#include "symgen/errors.hpp"
#include "symgen/infix.hpp"
#include "symgen/sampler.hpp"
#include "symgen/simplify.hpp"
#include "symgen/verify.hpp"

using namespace symgen;
using namespace symgen::build;

namespace {

Expression infix(const char* s) { return parse_infix(s); }

// Fills the hole tokens of a registry pattern.
Expression instantiate(const std::string& pattern, Rng& rng, const GrammarConfig& g, const SubtreeTable& table) {
  const auto small_int = [&](bool positive) {
    std::uniform_int_distribution<int> d(positive ? 1 : -6, 6);
    int v = 0;
    while (v == 0) v = d(rng);
    return to_prefix_string(num(v));
  };
  std::string out;
  for (const auto& tok : split_tokens(pattern)) {
    std::string piece = tok;
    if (tok == "u" || tok == "v") piece = to_prefix_string(sample_function(g, table, rng));
    else if (tok == "n" || tok == "m") piece = small_int(false);
    else if (tok == "k") piece = small_int(true);
    out += (out.empty() ? "" : " ") + piece;
  }
  return parse_prefix(out);
}

}  // namespace

TEST_CASE("canonical forms") {
  CHECK(to_prefix_string(simplify(x() + x())) == "* + 2 x");
  CHECK(simplify(x() - x()) == num(0));
  CHECK(simplify(num(2) * 3 + 4) == num(10));
  CHECK(simplify(x() * 1 + 0) == x());
  CHECK(simplify(infix("log(exp(x))")) == x());
  CHECK(simplify(infix("cos(x)^2 + sin(x)^2")) == num(1));
  CHECK(simplify(infix("(x + 1) - (1 + x)")) == num(0));
  CHECK(simplify(infix("x*y")) == simplify(infix("y*x")));
  CHECK(simplify(infix("6/4")) == simplify(infix("3/2")));
  CHECK(simplify(infix("sqrt(4)")) == num(2));
}

TEST_CASE("expand distributes and falls back on blow-up") {
  CHECK(expand(infix("(x + 1)*(x - 1)")) == simplify(infix("x^2 - 1")));
  CHECK(expand(infix("(x + 1)^2")) == simplify(infix("x^2 + 2*x + 1")));
  const Expression big = infix("(x + y + z + 1)^12");
  CHECK(expand(big, 50) == simplify(big));
}

TEST_CASE("the registry is well-formed") {
  const auto& reg = rule_registry();
  REQUIRE_FALSE(reg.empty());
  std::set<std::string> names;
  for (const auto& r : reg) {
    CHECK(names.insert(r.name).second);
    CHECK_FALSE(r.pattern.empty());
    if (r.cls == RuleClass::Assumption) CHECK_FALSE(r.assumption.empty());
  }
  const auto doc = nlohmann::json::parse(rule_manifest());
  CHECK(doc["rules"].size() == reg.size());
}

TEST_CASE("strict rules are sound on random instances") {
  const GrammarConfig g = GrammarConfig::dataset_default();
  const SubtreeTable table = build_tables(TreeMode::UnaryBinary, 4, g);
  Rng rng(5);
  ProbeConfig probes;
  probes.numeric_only = true;
  for (const auto& rule : rule_registry()) {
    if (rule.cls != RuleClass::Strict) continue;
    for (int i = 0; i < 20; ++i) {
      const Expression e = instantiate(rule.pattern, rng, g, table);
      const Expression s = simplify(e);
      const Verdict v = expr_equiv(e, s, probes);
      CAPTURE(rule.name);
      CAPTURE(to_prefix_string(e));
      CAPTURE(to_prefix_string(s));
      CHECK(v.outcome != Outcome::Invalid);
    }
  }
}

TEST_CASE("simplify is idempotent and value-preserving") {
  const GrammarConfig g = GrammarConfig::dataset_default();
  const SubtreeTable table = build_tables(TreeMode::UnaryBinary, 15, g);
  Rng rng(17);
  ProbeConfig probes;
  probes.numeric_only = true;
  int invalid = 0;
  for (int i = 0; i < 400; ++i) {
    const Expression e = sample_function(g, table, rng);
    const Expression s = simplify(e);
    CAPTURE(to_prefix_string(e));
    CHECK(simplify(s) == s);
    if (expr_equiv(e, s, probes).outcome == Outcome::Invalid) ++invalid;
  }
  CHECK(invalid == 0);
}

TEST_CASE("constant reduction carries witnesses") {
  const Expression cases[] = {
      infix("exp(c + 3)*x"),
      infix("2*c*x + 5"),
      infix("c + 3 + x"),
      infix("x*log(c/x)"),
      infix("c1*exp(x) + 3*c2*exp(-x)"),
  };
  ProbeConfig probes;
  probes.numeric_only = true;
  for (const auto& e : cases) {
    const auto r = reduce_constants_with_witness(e, {Symbol::C, Symbol::C1, Symbol::C2});
    CAPTURE(to_prefix_string(e));
    CAPTURE(to_prefix_string(r.result));
    CHECK(r.result.token_length() <= e.token_length());
    const Expression back = apply_witnesses(r.result, r.witnesses);
    CHECK(expr_equiv(back, e, probes).outcome != Outcome::Invalid);
  }
  CHECK(reduce_constants(infix("exp(c + 3)*x"), {Symbol::C}) == simplify(c() * x()));
}

TEST_CASE("assumption rules are recorded") {
  const auto r = reduce_constants_with_witness(infix("log(x^2) + c"), {Symbol::C});
  CHECK(std::find(r.assumptions.begin(), r.assumptions.end(), "log-power") != r.assumptions.end());
  // plain simplify never applies them
  CHECK(simplify(infix("log(x^2)")) != simplify(infix("2*log(x)")));
}

TEST_CASE("equation normalization") {
  CHECK(normalize_equation(infix("exp(x)*(y' - y)")) == normalize_equation(infix("y' - y")));
  CHECK(normalize_equation(infix("-(y'' - y)")) == normalize_equation(infix("y'' - y")));
  CHECK(normalize_equation(infix("(y' - x)/(x^2 + 1)")) == normalize_equation(infix("y' - x")));
  CHECK(normalize_equation(infix("y - y''")) == normalize_equation(infix("y'' - y")));
  CHECK(to_prefix_string(normalize_equation(infix("y'' - y"))) == "+ * - 1 y y''");
  CHECK_THROWS_AS(normalize_equation(infix("exp(x)")), NoFactorRemains);
}

TEST_CASE("sign provers") {
  CHECK(is_provably_positive(infix("exp(x)")));
  CHECK(is_provably_positive(infix("x^2 + 1")));
  CHECK(is_provably_nonnegative(infix("x^2")));
  CHECK_FALSE(is_provably_positive(infix("x^2")));
  CHECK_FALSE(is_provably_positive(infix("x - 1")));
  CHECK(is_provably_positive(infix("cosh(x)")));
}

TEST_CASE("linear forms") {
  const auto lf = linear_in(infix("x*c + sin(x)"), Symbol::C);
  REQUIRE(lf.has_value());
  CHECK(lf->coefficient == x());
  CHECK(lf->rest == sin(x()));
  CHECK_FALSE(linear_in(infix("c^2 + x"), Symbol::C).has_value());
}
