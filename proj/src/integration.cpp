#include "symgen/integration.hpp"

#include <cmath>
#include <istream>

#include "json.hpp"
#include "symgen/calculus.hpp"
#include "symgen/errors.hpp"
#include "symgen/hashing.hpp"
#include "symgen/infix.hpp"
#include "symgen/simplify.hpp"

namespace symgen {

std::string format_example(const Example& ex) {
  return to_prefix_string(ex.problem) + '\t' + to_prefix_string(ex.solution);
}

Example parse_example(const std::string& line, Task task) {
  const std::size_t tab = line.find('\t');
  if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
    throw MalformedSequence("expected exactly two tab-separated fields");
  }
  return Example{parse_prefix(std::string_view(line).substr(0, tab)), parse_prefix(std::string_view(line).substr(tab + 1)),
                 task};
}

namespace {

bool symbols_allowed(const Expression& e, const std::set<Symbol>& allowed) {
  for (Symbol s : kAllSymbols) {
    if (!allowed.count(s) && e.contains(s)) return false;
  }
  return true;
}

}  // namespace

std::optional<Example> clean(const Example& ex, std::size_t max_tokens) {
  Example out{simplify(ex.problem), simplify(ex.solution), ex.task};
  if (out.problem_tokens() > max_tokens || out.solution_tokens() > max_tokens) return std::nullopt;
  std::set<Symbol> problem_syms{Symbol::X, Symbol::E, Symbol::Pi};
  std::set<Symbol> solution_syms = problem_syms;
  if (!is_integration_task(ex.task)) {
    problem_syms.insert({Symbol::Y, Symbol::Dy, Symbol::D2y});
    solution_syms.insert({Symbol::C, Symbol::C1, Symbol::C2});
  }
  if (!symbols_allowed(out.problem, problem_syms) || !symbols_allowed(out.solution, solution_syms)) return std::nullopt;
  if (!is_valid_expression(out.problem) || !is_valid_expression(out.solution)) return std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------

bool PairStore::insert(const Expression& function, const Expression& integral) {
  const Expression f = simplify(function);
  return pairs_.emplace(to_prefix_string(f), std::make_pair(f, simplify(integral))).second;
}

std::optional<Expression> PairStore::lookup(const Expression& function) const {
  auto it = pairs_.find(to_prefix_string(simplify(function)));
  if (it == pairs_.end()) return std::nullopt;
  return it->second.second;
}

void PairStore::merge(const PairStore& other) { pairs_.insert(other.pairs_.begin(), other.pairs_.end()); }

PairStore PairStore::seeded() {
  static const char* const table[][2] = {
      {"1", "x"},
      {"x", "x^2/2"},
      {"x^2", "x^3/3"},
      {"x^3", "x^4/4"},
      {"1/x", "log(x)"},
      {"1/x^2", "-1/x"},
      {"sqrt(x)", "2*x*sqrt(x)/3"},
      {"1/sqrt(x)", "2*sqrt(x)"},
      {"exp(x)", "exp(x)"},
      {"exp(2*x)", "exp(2*x)/2"},
      {"exp(-x)", "-exp(-x)"},
      {"log(x)", "x*log(x) - x"},
      {"sin(x)", "-cos(x)"},
      {"cos(x)", "sin(x)"},
      {"tan(x)", "-log(cos(x))"},
      {"1/cos(x)^2", "tan(x)"},
      {"1/sin(x)^2", "-1/tan(x)"},
      {"sinh(x)", "cosh(x)"},
      {"cosh(x)", "sinh(x)"},
      {"tanh(x)", "log(cosh(x))"},
      {"1/cosh(x)^2", "tanh(x)"},
      {"1/(x^2 + 1)", "atan(x)"},
      {"1/sqrt(1 - x^2)", "asin(x)"},
      {"1/sqrt(x^2 + 1)", "asinh(x)"},
      {"1/sqrt(x^2 - 1)", "acosh(x)"},
      {"1/(1 - x^2)", "atanh(x)"},
      {"atan(x)", "x*atan(x) - log(x^2 + 1)/2"},
      {"asin(x)", "x*asin(x) + sqrt(1 - x^2)"},
      {"acos(x)", "x*acos(x) - sqrt(1 - x^2)"},
      {"x*exp(x)", "(x - 1)*exp(x)"},
      {"x*sin(x)", "sin(x) - x*cos(x)"},
      {"x*cos(x)", "cos(x) + x*sin(x)"},
      {"x*log(x)", "x^2*log(x)/2 - x^2/4"},
  };
  PairStore store;
  for (const auto& row : table) store.insert(parse_infix(row[0]), parse_infix(row[1]));
  return store;
}

// ---------------------------------------------------------------------------

namespace {

template <class Attempt>
void run_generator(std::size_t count, const GenConfig& cfg, const ExampleSink& sink, GenCounters& counters,
                   std::set<std::string>* seen, Attempt attempt) {
  std::set<std::string> local;
  if (!seen) seen = &local;
  std::size_t emitted = 0, consecutive = 0;
  while (emitted < count) {
    ++counters.attempts;
    std::optional<Example> ex;
    try {
      ex = attempt();
    } catch (const OracleUnavailable&) {
      throw;
    } catch (const Error&) {
      counters.reject("error");
    }
    if (ex && !seen->insert(ex->key()).second) {
      counters.reject("duplicate");
      ex.reset();
    }
    if (!ex) {
      if (++consecutive >= cfg.max_rejections) {
        throw RetriesExhausted(std::to_string(consecutive) + " consecutive attempts were rejected");
      }
      continue;
    }
    consecutive = 0;
    ++emitted;
    ++counters.emitted;
    sink(*ex);
  }
}

// Cleans the candidate and checks it against its own derivative.
std::optional<Example> finish(const Example& raw, const GenConfig& cfg, GenCounters& counters) {
  auto ex = clean(raw, cfg.max_tokens);
  if (!ex) {
    counters.reject("clean");
    return std::nullopt;
  }
  if (ex->problem.is_integer(0)) {
    counters.reject("zero-integrand");
    return std::nullopt;
  }
  if (!check_integral(ex->problem, ex->solution, cfg.probes).valid()) {
    counters.reject("self-check");
    return std::nullopt;
  }
  return ex;
}

Expression sample_simplified(const GrammarConfig& grammar, const SubtreeTable& table, Rng& rng) {
  return simplify(sample_function(grammar, table, rng));
}

void collect_terms(const Expression& e, bool negate, std::vector<std::pair<bool, Expression>>& out) {
  if (e.is_op(Op::Add) || e.is_op(Op::Sub)) {
    collect_terms(e.lhs(), negate, out);
    collect_terms(e.rhs(), e.is_op(Op::Sub) ? !negate : negate, out);
  } else {
    out.emplace_back(negate, e);
  }
}

// Antiderivatives are defined up to a constant: drop variable-free summands.
Expression drop_additive_constants(const Expression& e) {
  std::vector<std::pair<bool, Expression>> terms;
  collect_terms(simplify(e), false, terms);
  std::optional<Expression> acc;
  for (const auto& [negative, t] : terms) {
    if (!t.contains(Symbol::X)) continue;
    if (!acc) acc = negative ? build::neg(t) : t;
    else acc = Expression::binary(negative ? Op::Sub : Op::Add, *acc, t);
  }
  return acc ? simplify(*acc) : Expression::integer(0);
}

}  // namespace

std::optional<Example> bwd_example(const Expression& f, const GenConfig& cfg, GenCounters& counters) {
  const Expression F = simplify(f);
  if (!F.contains(Symbol::X)) {
    counters.reject("constant-function");
    return std::nullopt;
  }
  if (F.token_length() > cfg.max_tokens) {
    counters.reject("clean");
    return std::nullopt;
  }
  return finish(Example{differentiate(F, Symbol::X), F, Task::Bwd}, cfg, counters);
}

void gen_bwd(std::size_t count, const GenConfig& cfg, const SubtreeTable& table, Rng& rng, const ExampleSink& sink,
             GenCounters& counters, std::set<std::string>* seen) {
  run_generator(count, cfg, sink, counters, seen,
                [&] { return bwd_example(sample_function(cfg.grammar, table, rng), cfg, counters); });
}

void gen_fwd(std::size_t count, const GenConfig& cfg, const SubtreeTable& table, Rng& rng, IntegratorOracle& oracle,
             const ExampleSink& sink, GenCounters& counters, std::set<std::string>* seen) {
  run_generator(count, cfg, sink, counters, seen, [&]() -> std::optional<Example> {
    const Expression f = sample_simplified(cfg.grammar, table, rng);
    if (f.token_length() > cfg.max_tokens || !is_valid_expression(f)) {
      counters.reject("clean");
      return std::nullopt;
    }
    ++counters.oracle_calls;
    auto F = oracle.integrate(f, cfg.oracle_timeout);
    if (!F) {
      ++counters.oracle_failures;
      counters.reject("oracle-failed");
      return std::nullopt;
    }
    return finish(Example{f, *F, Task::Fwd}, cfg, counters);
  });
}

void gen_ibp(std::size_t count, const GenConfig& cfg, const SubtreeTable& table, Rng& rng, PairStore& store,
             const ExampleSink& sink, GenCounters& counters, std::set<std::string>* seen) {
  using namespace build;
  GrammarConfig grammar = cfg.grammar;
  grammar.max_internal_nodes = std::min(grammar.max_internal_nodes, cfg.ibp_max_nodes);
  run_generator(count, cfg, sink, counters, seen, [&]() -> std::optional<Example> {
    const Expression F = sample_simplified(grammar, table, rng);
    const Expression G = sample_simplified(grammar, table, rng);
    if (!F.contains(Symbol::X) || !G.contains(Symbol::X)) {
      counters.reject("constant-function");
      return std::nullopt;
    }
    if (F.token_length() > cfg.max_tokens || G.token_length() > cfg.max_tokens) {
      counters.reject("clean");
      return std::nullopt;
    }
    const Expression f = differentiate(F, Symbol::X);
    const Expression g = differentiate(G, Symbol::X);
    // F and G are antiderivatives of their own derivatives.
    store.insert(f, F);
    store.insert(g, G);
    std::optional<Example> raw;
    if (auto H = store.lookup(f * G)) {
      raw = Example{F * g, drop_additive_constants(F * G - *H), Task::Ibp};
    } else if (auto K = store.lookup(F * g)) {
      raw = Example{f * G, drop_additive_constants(F * G - *K), Task::Ibp};
    } else {
      counters.reject("no-known-integral");
      return std::nullopt;
    }
    auto ex = finish(*raw, cfg, counters);
    if (ex) store.insert(ex->problem, ex->solution);
    return ex;
  });
}

// ---------------------------------------------------------------------------

namespace {

struct Accumulator {
  std::size_t n = 0;
  double sum_in = 0, sum_in2 = 0, sum_out = 0, sum_out2 = 0;
  std::size_t max_in = 0, max_out = 0;

  void add(std::size_t in, std::size_t out) {
    ++n;
    sum_in += static_cast<double>(in);
    sum_in2 += static_cast<double>(in) * static_cast<double>(in);
    sum_out += static_cast<double>(out);
    sum_out2 += static_cast<double>(out) * static_cast<double>(out);
    max_in = std::max(max_in, in);
    max_out = std::max(max_out, out);
  }

  DatasetStats finish() const {
    DatasetStats s;
    s.count = n;
    if (n == 0) return s;
    const double d = static_cast<double>(n);
    s.mean_input = sum_in / d;
    s.mean_output = sum_out / d;
    s.std_input = std::sqrt(std::max(0.0, sum_in2 / d - s.mean_input * s.mean_input));
    s.std_output = std::sqrt(std::max(0.0, sum_out2 / d - s.mean_output * s.mean_output));
    s.length_ratio = s.mean_output / s.mean_input;
    s.max_input = max_in;
    s.max_output = max_out;
    return s;
  }
};

}  // namespace

DatasetStats compute_stats(const std::vector<Example>& examples) {
  Accumulator acc;
  for (const auto& ex : examples) acc.add(ex.problem_tokens(), ex.solution_tokens());
  return acc.finish();
}

DatasetStats compute_stats(std::istream& in) {
  Accumulator acc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      const Example ex = parse_example(line, Task::Bwd);
      acc.add(ex.problem_tokens(), ex.solution_tokens());
    } catch (const MalformedSequence& e) {
      throw FileMalformed("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return acc.finish();
}

std::string stats_json(const DatasetStats& s) {
  nlohmann::json j{{"count", s.count},           {"mean_input", s.mean_input},   {"std_input", s.std_input},
                   {"mean_output", s.mean_output}, {"std_output", s.std_output}, {"length_ratio", s.length_ratio},
                   {"max_input", s.max_input},     {"max_output", s.max_output}};
  return j.dump();
}

double split_fraction(const std::string& key) {
  return static_cast<double>(sha1_prefix64(key) >> 11) * 0x1.0p-53;
}

}  // namespace symgen
