#include "symgen/ode.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include "symgen/calculus.hpp"
#include "symgen/errors.hpp"
#include "symgen/simplify.hpp"

namespace symgen {

using namespace build;

Expression plant_constant(const Expression& f, Symbol constant, Rng& rng) {
  const auto paths = leaf_paths(f);
  boost::random::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  return replace_at(f, paths[pick(rng)], Expression::symbol(constant));
}

namespace {

Expression invert_unary(Op op, const Expression& r) {
  switch (op) {
    case Op::Exp: return log(r);
    case Op::Log: return exp(r);
    case Op::Sqrt: return pow(r, 2);
    case Op::Sin: return asin(r);
    case Op::Cos: return acos(r);
    case Op::Tan: return atan(r);
    case Op::Asin: return sin(r);
    case Op::Acos: return cos(r);
    case Op::Atan: return tan(r);
    case Op::Sinh: return asinh(r);
    case Op::Cosh: return acosh(r);
    case Op::Tanh: return atanh(r);
    case Op::Asinh: return sinh(r);
    case Op::Acosh: return cosh(r);
    case Op::Atanh: return tanh(r);
    default: break;
  }
  throw NotInvertiblePath("no inverse registered for " + std::string(token(op)));
}

Expression integer_root(const Expression& r, const BigInt& k) {
  if (k == 1) return r;
  if (k == -1) return num(1) / r;
  if (k == 2) return sqrt(r);
  if (k == -2) return num(1) / sqrt(r);
  return pow(r, Expression::integer(1) / Expression::integer(k));
}

}  // namespace

SolvedForm solve_for_symbol(const Expression& lhs, const Expression& value, Symbol target) {
  const std::size_t occurrences = count_occurrences(lhs, target);
  if (occurrences > 1) throw MultipleOccurrences(std::string(token(target)) + " occurs more than once");
  if (occurrences == 0) throw NotInvertiblePath(std::string(token(target)) + " does not occur");
  SolvedForm out;
  out.target = target;
  Expression cur = lhs;
  Expression rhs = value;
  while (!cur.is_symbol(target)) {
    if (cur.kind() == Expression::Kind::Unary) {
      rhs = invert_unary(cur.op(), rhs);
      out.trace.emplace_back(token(cur.op()));
      cur = cur.arg();
      continue;
    }
    const Expression& a = cur.lhs();
    const Expression& b = cur.rhs();
    const bool left = a.contains(target);
    switch (cur.op()) {
      case Op::Add: rhs = left ? rhs - b : rhs - a; break;
      case Op::Sub: rhs = left ? rhs + b : a - rhs; break;
      case Op::Mul: rhs = left ? rhs / b : rhs / a; break;
      case Op::Div: rhs = left ? rhs * b : a / rhs; break;
      case Op::Pow:
        if (!left || !b.is_integer() || b.value() == 0) {
          throw NotInvertiblePath("pow is only inverted in its base with a constant integer exponent");
        }
        rhs = integer_root(rhs, b.value());
        break;
      default: throw NotInvertiblePath("unknown operator on the path");
    }
    out.trace.emplace_back(token(cur.op()));
    cur = left ? a : b;
  }
  out.expr = simplify(rhs);
  return out;
}

namespace {

bool has_constants(const Expression& e) {
  return e.contains(Symbol::C) || e.contains(Symbol::C1) || e.contains(Symbol::C2);
}

std::optional<Expression> normalized(const Expression& raw, OdeCounters& counters) {
  try {
    return normalize_equation(raw);
  } catch (const NoFactorRemains&) {
    counters.reject("degenerate-equation");
    return std::nullopt;
  }
}

bool too_long(const Expression& e, const OdeConfig& cfg, OdeCounters& counters, std::size_t slack = 1) {
  if (e.token_length() <= slack * static_cast<std::size_t>(cfg.max_tokens)) return false;
  counters.reject("too-long");
  return true;
}

bool passes_gate(const OdeExample& ex, const OdeConfig& cfg, OdeCounters& counters) {
  if (ex.equation.token_length() > static_cast<std::size_t>(cfg.max_tokens) ||
      ex.solution.token_length() > static_cast<std::size_t>(cfg.max_tokens)) {
    counters.reject("too-long");
    return false;
  }
  if (!is_valid_expression(ex.equation) || !is_valid_expression(ex.solution)) {
    counters.reject("invalid-expression");
    return false;
  }
  const Symbol top = ex.order == 2 ? Symbol::D2y : Symbol::Dy;
  if (!ex.equation.contains(top)) {
    counters.reject("missing-derivative");
    return false;
  }
  if (has_constants(ex.equation)) {
    counters.reject("constant-in-equation");
    return false;
  }
  for (std::uint64_t seed : cfg.gate_seeds) {
    ProbeConfig probes;
    probes.seed = seed;
    probes.probes = cfg.gate_probes;
    probes.numeric_only = true;
    if (auto v = check_ode(ex.equation, ex.solution, ex.order, probes); !v.valid()) {
      counters.reject("self-check");
      return false;
    }
  }
  return true;
}

// Isolates c1 from G(x, y, y', c1) = 0 when it occurs once, possibly after
// collapsing its occurrences.
std::optional<Expression> solve_c1(const Expression& g) {
  std::vector<Expression> candidates{simplify(g), reduce_constants(g, {Symbol::C1})};
  try {
    candidates.push_back(normalize_equation(g));
  } catch (const NoFactorRemains&) {
  }
  for (const auto& cand : candidates) {
    if (count_occurrences(cand, Symbol::C1) != 1) continue;
    try {
      return solve_for_symbol(cand, num(0), Symbol::C1).expr;
    } catch (const NotInvertiblePath&) {
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<OdeExample> ode1_from_solution(const Expression& f_c, const OdeConfig& cfg, OdeCounters& counters) {
  const Expression f = reduce_constants(f_c, {Symbol::C});
  if (count_occurrences(f, Symbol::C) != 1) {
    counters.reject("constant-occurrence");
    return std::nullopt;
  }
  if (!f.contains(Symbol::X)) {
    counters.reject("constant-solution");
    return std::nullopt;
  }
  if (!is_valid_expression(f)) {
    counters.reject("invalid-expression");
    return std::nullopt;
  }
  Expression solved;
  try {
    solved = solve_for_symbol(f, y(), Symbol::C).expr;
  } catch (const NotInvertiblePath&) {
    counters.reject("solve-c");
    return std::nullopt;
  }
  auto eq = normalized(total_derivative(solved), counters);
  if (!eq) return std::nullopt;
  OdeExample ex{*eq, f, 1};
  if (!passes_gate(ex, cfg, counters)) return std::nullopt;
  return ex;
}

std::optional<OdeExample> ode2_from_solution(const Expression& f_c, const OdeConfig& cfg, OdeCounters& counters) {
  const Expression f = reduce_constants(f_c, {Symbol::C1, Symbol::C2});
  if (count_occurrences(f, Symbol::C2) != 1 || count_occurrences(f, Symbol::C1) == 0) {
    counters.reject("constant-occurrence");
    return std::nullopt;
  }
  if (!f.contains(Symbol::X)) {
    counters.reject("constant-solution");
    return std::nullopt;
  }
  if (!is_valid_expression(f)) {
    counters.reject("invalid-expression");
    return std::nullopt;
  }
  Expression solved_c2;
  try {
    solved_c2 = solve_for_symbol(f, y(), Symbol::C2).expr;
  } catch (const NotInvertiblePath&) {
    counters.reject("solve-c2");
    return std::nullopt;
  }
  if (too_long(solved_c2, cfg, counters)) return std::nullopt;
  const Expression first = total_derivative(solved_c2);
  if (too_long(first, cfg, counters, 2)) return std::nullopt;
  if (!first.contains(Symbol::C1)) {
    counters.reject("c1-vanished");
    return std::nullopt;
  }
  ++counters.c1_attempts;
  auto solved_c1 = solve_c1(first);
  if (!solved_c1) {
    ++counters.c1_skipped;
    counters.reject("solve-c1");
    return std::nullopt;
  }
  if (solved_c1->contains(Symbol::D2y)) {
    counters.reject("solve-c1");
    return std::nullopt;
  }
  // The equation is at least as long as the expression it is derived from.
  if (too_long(*solved_c1, cfg, counters)) return std::nullopt;
  const Expression second = total_derivative(*solved_c1);
  if (too_long(second, cfg, counters, 2)) return std::nullopt;
  auto eq = normalized(second, counters);
  if (!eq) return std::nullopt;
  OdeExample ex{*eq, f, 2};
  if (!passes_gate(ex, cfg, counters)) return std::nullopt;
  return ex;
}

std::optional<OdeExample> gen_ode1(const OdeConfig& cfg, const SubtreeTable& table, Rng& rng, OdeCounters& counters) {
  ++counters.attempts;
  const Expression f = sample_function(cfg.grammar, table, rng);
  auto ex = ode1_from_solution(plant_constant(f, Symbol::C, rng), cfg, counters);
  if (ex) ++counters.emitted;
  return ex;
}

std::optional<OdeExample> gen_ode2(const OdeConfig& cfg, const SubtreeTable& table, Rng& rng, OdeCounters& counters) {
  ++counters.attempts;
  const Expression f = sample_function(cfg.grammar, table, rng);
  const auto paths = leaf_paths(f);
  if (paths.size() < 2) {
    counters.reject("too-few-leaves");
    return std::nullopt;
  }
  boost::random::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  const std::size_t i = pick(rng);
  std::size_t j = pick(rng);
  while (j == i) j = pick(rng);
  Expression planted = replace_at(f, paths[i], c1());
  planted = replace_at(planted, paths[j], c2());
  auto ex = ode2_from_solution(planted, cfg, counters);
  if (ex) ++counters.emitted;
  return ex;
}

void gen_odes(int order, std::size_t count, const OdeConfig& cfg, const SubtreeTable& table, Rng& rng,
              const std::function<void(const OdeExample&)>& sink, OdeCounters& counters, std::set<std::string>* seen) {
  if (order != 1 && order != 2) throw InvalidConfig("ODE order must be 1 or 2");
  std::set<std::string> local;
  if (!seen) seen = &local;
  std::size_t emitted = 0, consecutive = 0;
  while (emitted < count) {
    std::optional<OdeExample> ex;
    try {
      ex = order == 1 ? gen_ode1(cfg, table, rng, counters) : gen_ode2(cfg, table, rng, counters);
    } catch (const Error&) {
      counters.reject("error");
    }
    if (ex && !seen->insert(to_prefix_string(ex->equation)).second) {
      counters.reject("duplicate");
      --counters.emitted;
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
    sink(*ex);
  }
}

}  // namespace symgen
