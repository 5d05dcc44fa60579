#include "symgen/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "json.hpp"
#include "symgen/errors.hpp"
#include "symgen/simplify.hpp"

namespace symgen {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Valid: return "valid";
    case Outcome::Invalid: return "invalid";
    case Outcome::Undecidable: return "undecidable";
  }
  return "undecidable";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::SymbolicZero: return "symbolic-zero";
    case Method::NumericProbe: return "numeric-probe";
    case Method::Substitution: return "substitution";
  }
  return "numeric-probe";
}

std::string to_string(Task t) {
  switch (t) {
    case Task::Fwd: return "fwd";
    case Task::Bwd: return "bwd";
    case Task::Ibp: return "ibp";
    case Task::Ode1: return "ode1";
    case Task::Ode2: return "ode2";
  }
  return "bwd";
}

std::optional<Task> task_from_string(const std::string& s) {
  for (Task t : {Task::Fwd, Task::Bwd, Task::Ibp, Task::Ode1, Task::Ode2}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

void ProbeConfig::validate() const {
  if (probes < 1) throw InvalidConfig("probe count must be positive");
  if (!(x_min > 0) || !(x_max > x_min)) throw InvalidConfig("probe range must satisfy 0 < x_min < x_max");
  if (!(rel_tol > 0)) throw InvalidConfig("tolerance must be positive");
  if (min_survivors < 3) throw InvalidConfig("at least 3 surviving probes are required");
  if (constant_values.empty()) throw InvalidConfig("constant test values must not be empty");
  if (max_rounds < 1) throw InvalidConfig("max_rounds must be positive");
}

std::vector<Bindings> constant_assignments(const ProbeConfig& cfg) {
  std::vector<Bindings> out;
  const std::size_t m = cfg.constant_values.size();
  for (std::size_t j = 0; j < m; ++j) {
    Bindings b;
    b.set(Symbol::C, cfg.constant_values[j]);
    b.set(Symbol::C1, cfg.constant_values[j]);
    b.set(Symbol::C2, cfg.constant_values[(j + 1) % m]);
    out.push_back(b);
  }
  return out;
}

namespace {

using Rng64 = std::mt19937_64;

double draw_abscissa(const ProbeConfig& cfg, Rng64& rng) {
  boost::random::uniform_real_distribution<double> u(std::log(cfg.x_min), std::log(cfg.x_max));
  double v = std::exp(u(rng));
  if (cfg.random_sign && boost::random::uniform_01<double>()(rng) < 0.5) v = -v;
  return v;
}

struct SignedTerm {
  int sign;
  Expression term;
};

void flatten_sum(const Expression& e, int sign, std::vector<SignedTerm>& out) {
  if (e.is_op(Op::Add)) {
    flatten_sum(e.lhs(), sign, out);
    flatten_sum(e.rhs(), sign, out);
  } else if (e.is_op(Op::Sub)) {
    flatten_sum(e.lhs(), sign, out);
    flatten_sum(e.rhs(), -sign, out);
  } else {
    out.push_back({sign, e});
  }
}

constexpr std::array<Symbol, 3> kProbeVariables = {Symbol::X, Symbol::Y, Symbol::Z};

bool uses_constants(const std::vector<SignedTerm>& terms) {
  return std::any_of(terms.begin(), terms.end(), [](const SignedTerm& t) {
    return t.term.contains(Symbol::C) || t.term.contains(Symbol::C1) || t.term.contains(Symbol::C2);
  });
}

// Evaluates the signed sum; nullopt when any term is unusable.
struct Sample {
  double residual;
  double scale;
};

std::optional<Sample> sample_terms(const std::vector<SignedTerm>& terms, const Bindings& b, double limit) {
  double sum = 0.0, scale = 1.0;
  for (const auto& t : terms) {
    const EvalResult r = evaluate(t.term, b);
    if (!r.finite() || r.max_magnitude > limit) return std::nullopt;
    sum += t.sign * r.value;
    scale = std::max(scale, std::abs(r.value));
  }
  return Sample{sum, scale};
}

std::optional<Sample> sample_terms_precise(const std::vector<SignedTerm>& terms, const Bindings& b) {
  double sum = 0.0, scale = 1.0;
  for (const auto& t : terms) {
    const auto r = evaluate_precise(t.term, b);
    if (!r) return std::nullopt;
    sum += t.sign * *r;
    scale = std::max(scale, std::abs(*r));
  }
  return Sample{sum, scale};
}

using Point = std::array<double, kProbeVariables.size()>;

// Probes terms (whose signed sum must vanish) over points x constants.
Verdict probe_residual(const std::vector<SignedTerm>& terms, const ProbeConfig& cfg) {
  cfg.validate();
  Verdict v;
  v.method = Method::NumericProbe;
  Rng64 rng(cfg.seed);
  std::vector<Bindings> assignments =
      uses_constants(terms) ? constant_assignments(cfg) : std::vector<Bindings>{Bindings{}};
  std::vector<Point> survivors;

  // false once the point shows a mismatch
  const auto probe = [&](const Point& point) {
    bool survived = false;
    for (Bindings b : assignments) {
      for (std::size_t k = 0; k < kProbeVariables.size(); ++k) b.set(kProbeVariables[k], point[k]);
      auto s = sample_terms(terms, b, cfg.magnitude_limit);
      if (!s) continue;
      double rel = std::abs(s->residual) / s->scale;
      if (!(rel <= cfg.rel_tol)) {
        // a mismatch only counts if it survives higher-precision arithmetic
        auto precise = sample_terms_precise(terms, b);
        if (!precise) continue;
        rel = std::abs(precise->residual) / precise->scale;
      }
      ++v.probes_used;
      survived = true;
      v.max_residual = std::max(v.max_residual, rel);
      if (!(rel <= cfg.rel_tol)) {
        v.outcome = Outcome::Invalid;
        v.failed_point = point[0];
        v.detail = "residual " + std::to_string(rel) + " at x=" + std::to_string(point[0]);
        return false;
      }
    }
    if (survived) survivors.push_back(point);
    return true;
  };

  const int limit = cfg.probes * cfg.max_rounds;
  for (int i = 0; i < limit; ++i) {
    if (i >= cfg.probes && i % cfg.probes == 0 && v.probes_used >= cfg.min_survivors) break;
    Point point{};
    for (auto& p : point) p = draw_abscissa(cfg, rng);
    if (!probe(point)) return v;
  }
  // Nothing survived: scan the probe range on a fixed grid for defined points.
  if (survivors.empty()) {
    const int steps = 200;
    const double lo = std::log(cfg.x_min), hi = std::log(cfg.x_max);
    for (int i = 0; i <= steps && v.probes_used < cfg.min_survivors; ++i) {
      for (double sign : {1.0, -1.0}) {
        if (sign < 0 && !cfg.random_sign) continue;
        Point point;
        point.fill(sign * std::exp(lo + (hi - lo) * i / steps));
        if (!probe(point)) return v;
      }
    }
  }
  // Narrow domains: look around the points that did survive.
  boost::random::uniform_real_distribution<double> jitter(-0.05, 0.05);
  const std::size_t seeds = survivors.size();
  for (int i = 0; i < limit && seeds > 0 && v.probes_used < cfg.min_survivors; ++i) {
    Point point = survivors[static_cast<std::size_t>(i) % seeds];
    for (auto& p : point) p += jitter(rng) * std::max(std::abs(p), cfg.x_min);
    if (!probe(point)) return v;
  }
  if (v.probes_used < cfg.min_survivors) {
    v.outcome = Outcome::Undecidable;
    v.detail = "only " + std::to_string(v.probes_used) + " probes survived";
    return v;
  }
  v.outcome = Outcome::Valid;
  return v;
}

bool symbolic_zero(const Expression& e) {
  try {
    return simplify(e).is_integer(0);
  } catch (const Error&) {
    return false;
  }
}

Verdict symbolic_valid() {
  Verdict v;
  v.outcome = Outcome::Valid;
  v.method = Method::SymbolicZero;
  return v;
}

}  // namespace

std::vector<double> probe_points(const ProbeConfig& cfg) {
  Rng64 rng(cfg.seed);
  std::vector<double> out;
  for (int i = 0; i < cfg.probes * cfg.max_rounds; ++i) {
    out.push_back(draw_abscissa(cfg, rng));
    for (std::size_t k = 1; k < kProbeVariables.size(); ++k) draw_abscissa(cfg, rng);
  }
  return out;
}

Verdict expr_equiv(const Expression& a, const Expression& b, const ProbeConfig& cfg) {
  if (!cfg.numeric_only && symbolic_zero(Expression::binary(Op::Sub, a, b))) return symbolic_valid();
  std::vector<SignedTerm> terms;
  flatten_sum(a, 1, terms);
  flatten_sum(b, -1, terms);
  return probe_residual(terms, cfg);
}

Verdict check_integral(const Expression& problem, const Expression& hypothesis, const ProbeConfig& cfg) {
  Expression derivative;
  try {
    derivative = differentiate(hypothesis, Symbol::X);
  } catch (const Error& e) {
    Verdict v;
    v.outcome = Outcome::Invalid;
    v.detail = e.what();
    return v;
  }
  return expr_equiv(derivative, problem, cfg);
}

Verdict check_ode(const Expression& equation, const Expression& hypothesis, int order, const ProbeConfig& cfg) {
  Verdict fail;
  fail.method = Method::Substitution;
  fail.outcome = Outcome::Invalid;
  if (hypothesis.contains(Symbol::Y) || hypothesis.contains(Symbol::Dy) || hypothesis.contains(Symbol::D2y)) {
    fail.detail = "hypothesis must not mention y";
    return fail;
  }
  if (order < 2 && equation.contains(Symbol::D2y)) {
    fail.detail = "first-order check of an equation containing y''";
    return fail;
  }
  Expression d1, d2;
  try {
    d1 = differentiate(hypothesis, Symbol::X);
    if (equation.contains(Symbol::D2y)) d2 = differentiate(d1, Symbol::X);
  } catch (const Error& e) {
    fail.detail = e.what();
    return fail;
  }
  auto plug = [&](const Expression& t) {
    Expression r = substitute(t, Symbol::D2y, d2);
    r = substitute(r, Symbol::Dy, d1);
    return substitute(r, Symbol::Y, hypothesis);
  };
  std::vector<SignedTerm> terms;
  flatten_sum(equation, 1, terms);
  for (auto& t : terms) t.term = plug(t.term);
  if (!cfg.numeric_only && symbolic_zero(plug(equation))) {
    Verdict v = symbolic_valid();
    return v;
  }
  Verdict v = probe_residual(terms, cfg);
  v.method = Method::Substitution;
  return v;
}

BatchReport verify_batch(std::istream& in, const ProbeConfig& cfg, Task default_task) {
  BatchReport report;
  std::map<std::string, bool> solved;
  std::vector<std::string> order;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    LineVerdict lv;
    lv.line = lineno;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = raw.find('\t', start);
      fields.push_back(raw.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    lv.verdict.outcome = Outcome::Invalid;
    try {
      if (fields.size() < 2 || fields.size() > 3) throw MalformedSequence("expected 2 or 3 tab-separated fields");
      Task task = default_task;
      if (fields.size() == 3) {
        auto t = task_from_string(fields[2]);
        if (!t) throw MalformedSequence("unknown task '" + fields[2] + "'");
        task = *t;
      }
      const Expression problem = parse_prefix(fields[0]);
      lv.problem_key = to_prefix_string(problem);
      const Expression hyp = parse_prefix(fields[1]);
      if (is_integration_task(task)) {
        lv.verdict = check_integral(problem, hyp, cfg);
      } else {
        lv.verdict = check_ode(problem, hyp, task == Task::Ode2 ? 2 : 1, cfg);
      }
    } catch (const MalformedSequence& e) {
      lv.malformed = true;
      lv.verdict.detail = e.what();
    }
    // a line whose problem does not parse names no problem
    if (lv.problem_key.empty()) {
      report.lines.push_back(std::move(lv));
      continue;
    }
    if (!solved.count(lv.problem_key)) {
      solved[lv.problem_key] = false;
      order.push_back(lv.problem_key);
    }
    if (lv.verdict.valid()) solved[lv.problem_key] = true;
    report.lines.push_back(std::move(lv));
  }
  report.problems = order.size();
  report.solved = static_cast<std::size_t>(std::count_if(solved.begin(), solved.end(), [](const auto& kv) { return kv.second; }));
  return report;
}

void write_report(std::ostream& out, const BatchReport& report) {
  for (const auto& lv : report.lines) {
    nlohmann::json j{{"line", lv.line},
                     {"outcome", to_string(lv.verdict.outcome)},
                     {"method", to_string(lv.verdict.method)},
                     {"max_residual", lv.verdict.max_residual}};
    if (lv.malformed) j["malformed"] = true;
    out << j.dump() << '\n';
  }
}

}  // namespace symgen
