#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "symgen/calculus.hpp"
#include "symgen/errors.hpp"
#include "symgen/infix.hpp"
#include "symgen/integration.hpp"
#include "symgen/simplify.hpp"

using namespace symgen;
using namespace symgen::build;

namespace {

// Integrates by lookup; one entry is deliberately wrong.
class TableOracle : public IntegratorOracle {
 public:
  TableOracle() {
    const PairStore seeded = PairStore::seeded();
    for (const auto& [f, F] : seeded.pairs()) table_[f] = F.second;
    table_[to_prefix_string(simplify(parse_infix("tan(x)")))] = parse_infix("log(cos(x))");
  }
  std::optional<Expression> integrate(const Expression& integrand, double) override {
    ++calls;
    auto it = table_.find(to_prefix_string(simplify(integrand)));
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }
  int calls = 0;

 private:
  std::map<std::string, Expression> table_;
};

struct Fixture {
  GenConfig cfg;
  SubtreeTable table = build_tables(TreeMode::UnaryBinary, 15, cfg.grammar);
};

}  // namespace

TEST_CASE("dataset lines round-trip") {
  const Example ex{parse_infix("cos(x)"), parse_infix("sin(x)"), Task::Bwd};
  const std::string line = format_example(ex);
  CHECK(line == "cos x\tsin x");
  const Example back = parse_example(line, Task::Bwd);
  CHECK(back.problem == ex.problem);
  CHECK(back.solution == ex.solution);
  CHECK_THROWS_AS(parse_example("cos x", Task::Bwd), MalformedSequence);
  CHECK_THROWS_AS(parse_example("cos x\tsin x\tx", Task::Bwd), MalformedSequence);
  CHECK_THROWS_AS(parse_example("cos\tsin x", Task::Bwd), MalformedSequence);
}

TEST_CASE("cleaning simplifies and filters") {
  const auto ok = clean({parse_infix("x + x"), parse_infix("x^2"), Task::Bwd});
  REQUIRE(ok.has_value());
  CHECK(ok->problem == simplify(parse_infix("2*x")));
  CHECK_FALSE(clean({parse_infix("x + log(-1)"), x(), Task::Bwd}).has_value());
  CHECK_FALSE(clean({parse_infix("y + x"), x(), Task::Bwd}).has_value());
  CHECK(clean({parse_infix("y' - y"), parse_infix("c*exp(x)"), Task::Ode1}).has_value());
  Expression long_expr = x();
  for (int i = 0; i < 200; ++i) long_expr = sin(long_expr);
  CHECK_FALSE(clean({long_expr, x(), Task::Bwd}, 100).has_value());
}

TEST_CASE("pair store") {
  PairStore s;
  CHECK(s.insert(parse_infix("x + x"), parse_infix("x^2")));
  CHECK_FALSE(s.insert(parse_infix("2*x"), parse_infix("x^2 + 1")));
  CHECK(s.lookup(parse_infix("2*x")) == parse_infix("x^2"));
  CHECK_FALSE(s.contains(x()));
  PairStore t;
  t.insert(x(), parse_infix("x^2/2"));
  t.insert(parse_infix("2*x"), parse_infix("x^2 + 5"));
  s.merge(t);
  CHECK(s.size() == 2);
  CHECK(s.lookup(parse_infix("2*x")) == parse_infix("x^2"));
}

TEST_CASE("the seeded store is correct") {
  const PairStore s = PairStore::seeded();
  CHECK(s.size() >= 30);
  for (const auto& [key, pair] : s.pairs()) {
    CAPTURE(key);
    CHECK(check_integral(pair.first, pair.second).valid());
  }
}

TEST_CASE("backward examples") {
  Fixture fx;
  GenCounters counters;
  const auto ex = bwd_example(parse_infix("x*sin(x)"), fx.cfg, counters);
  REQUIRE(ex.has_value());
  CHECK(ex->solution == simplify(parse_infix("x*sin(x)")));
  CHECK(check_integral(ex->problem, ex->solution).valid());
  CHECK_FALSE(bwd_example(parse_infix("sin(3)"), fx.cfg, counters).has_value());

  Rng rng(1);
  std::vector<Example> out;
  gen_bwd(200, fx.cfg, fx.table, rng, [&](const Example& e) { out.push_back(e); }, counters);
  REQUIRE(out.size() == 200);
  std::set<std::string> keys;
  for (const auto& e : out) {
    CHECK(e.task == Task::Bwd);
    CHECK(keys.insert(e.key()).second);
    ProbeConfig other;
    other.seed = 7;
    CHECK(check_integral(e.problem, e.solution, other).valid());
  }
  const DatasetStats st = compute_stats(out);
  CHECK(st.count == 200);
  CHECK(st.mean_input > st.mean_output);
}

TEST_CASE("shared dedup set across calls") {
  Fixture fx;
  GenCounters counters;
  std::set<std::string> seen;
  std::vector<Example> out;
  Rng a(3), b(3);
  gen_bwd(50, fx.cfg, fx.table, a, [&](const Example& e) { out.push_back(e); }, counters, &seen);
  gen_bwd(50, fx.cfg, fx.table, b, [&](const Example& e) { out.push_back(e); }, counters, &seen);
  std::set<std::string> keys;
  for (const auto& e : out) keys.insert(e.key());
  CHECK(keys.size() == 100);
  CHECK(seen.size() == 100);
}

TEST_CASE("integration by parts") {
  Fixture fx;
  GenCounters counters;
  PairStore store = PairStore::seeded();
  const std::size_t before = store.size();
  Rng rng(2);
  std::vector<Example> out;
  gen_ibp(60, fx.cfg, fx.table, rng, store, [&](const Example& e) { out.push_back(e); }, counters);
  REQUIRE(out.size() == 60);
  CHECK(store.size() > before + 60);
  for (const auto& e : out) {
    CAPTURE(format_example(e));
    CHECK(e.task == Task::Ibp);
    CHECK(check_integral(e.problem, e.solution).valid());
    CHECK(store.contains(e.problem));
  }
  CHECK(counters.rejected.count("no-known-integral"));
}

TEST_CASE("forward generation through an oracle") {
  Fixture fx;
  fx.cfg.grammar.max_internal_nodes = 1;
  fx.cfg.max_rejections = 5000;
  TableOracle oracle;
  GenCounters counters;
  Rng rng(4);
  std::vector<Example> out;
  gen_fwd(5, fx.cfg, fx.table, rng, oracle, [&](const Example& e) { out.push_back(e); }, counters);
  CHECK(out.size() == 5);
  for (const auto& e : out) {
    CHECK(check_integral(e.problem, e.solution).valid());
    CHECK(e.problem != simplify(parse_infix("tan(x)")));
  }
  CHECK(counters.oracle_calls == static_cast<std::size_t>(oracle.calls));
  CHECK(counters.oracle_failure_rate() > 0.0);
  CHECK(counters.oracle_failure_rate() < 1.0);
}

TEST_CASE("generators give up after too many rejections") {
  Fixture fx;
  fx.cfg.max_tokens = 2;
  fx.cfg.max_rejections = 20;
  GenCounters counters;
  Rng rng(0);
  CHECK_THROWS_AS(gen_bwd(5, fx.cfg, fx.table, rng, [](const Example&) {}, counters), RetriesExhausted);
}

TEST_CASE("statistics from a file") {
  std::istringstream in("cos x\tsin x\n+ x x\tpow x + 2\n");
  const DatasetStats s = compute_stats(in);
  CHECK(s.count == 2);
  CHECK(s.mean_input == doctest::Approx(2.5));
  CHECK(s.mean_output == doctest::Approx(3.0));
  CHECK(s.length_ratio == doctest::Approx(1.2));
  CHECK(s.max_output == 4);
  const auto j = nlohmann::json::parse(stats_json(s));
  CHECK(j["count"] == 2);
  std::istringstream bad("cos x\tsin x\nnonsense\n");
  try {
    compute_stats(bad);
    FAIL("expected FileMalformed");
  } catch (const FileMalformed& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("split fractions are stable and spread out") {
  CHECK(split_fraction("cos x") == split_fraction("cos x"));
  int low = 0;
  for (int i = 0; i < 1000; ++i) {
    const double f = split_fraction("key " + std::to_string(i));
    CHECK(f >= 0.0);
    CHECK(f < 1.0);
    if (f < 0.5) ++low;
  }
  CHECK(low > 430);
  CHECK(low < 570);
}
