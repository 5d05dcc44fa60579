#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "symgen/calculus.hpp"
#include "symgen/expr.hpp"

namespace symgen {

enum class Outcome { Valid, Invalid, Undecidable };
enum class Method { SymbolicZero, NumericProbe, Substitution };

std::string to_string(Outcome o);
std::string to_string(Method m);

struct Verdict {
  Outcome outcome = Outcome::Undecidable;
  Method method = Method::NumericProbe;
  double max_residual = 0.0;
  int probes_used = 0;  // surviving (point, constant assignment) pairs
  std::optional<double> failed_point;
  std::string detail;

  bool valid() const { return outcome == Outcome::Valid; }
};

struct ProbeConfig {
  int probes = 20;
  double x_min = 1e-2;  // magnitudes are log-uniform in [x_min, x_max]
  double x_max = 10.0;
  bool random_sign = true;
  std::vector<double> constant_values{0.5, 1.0, 2.0, -1.0};
  double rel_tol = 1e-6;
  int min_survivors = 5;
  /// Batches of `probes` points, drawn one after another while too few probes survive.
  int max_rounds = 5;
  double magnitude_limit = 1e8;
  std::uint64_t seed = 0x5eed5eedULL;
  /// Skip the simplify(a - b) == 0 shortcut.
  bool numeric_only = false;

  /// Throws InvalidConfig.
  void validate() const;
};

/// One assignment of values to c, c1, c2 per entry, distinct constants
/// getting distinct values where the value list allows.
std::vector<Bindings> constant_assignments(const ProbeConfig& cfg);

/// Draws the probe abscissas for cfg (deterministic in cfg.seed).
std::vector<double> probe_points(const ProbeConfig& cfg);

Verdict expr_equiv(const Expression& a, const Expression& b, const ProbeConfig& cfg = {});

/// Valid iff d/dx hypothesis matches problem.
Verdict check_integral(const Expression& problem, const Expression& hypothesis, const ProbeConfig& cfg = {});

/// Valid iff substituting y (and its derivatives) by the hypothesis makes
/// the equation vanish at the probe points.
Verdict check_ode(const Expression& equation, const Expression& hypothesis, int order, const ProbeConfig& cfg = {});

enum class Task { Fwd, Bwd, Ibp, Ode1, Ode2 };
std::string to_string(Task t);
std::optional<Task> task_from_string(const std::string& s);
inline bool is_integration_task(Task t) { return t == Task::Fwd || t == Task::Bwd || t == Task::Ibp; }

struct LineVerdict {
  std::size_t line = 0;  // 1-based
  std::string problem_key;
  Verdict verdict;
  bool malformed = false;
};

struct BatchReport {
  std::vector<LineVerdict> lines;
  std::size_t problems = 0;
  std::size_t solved = 0;
  double accuracy() const { return problems == 0 ? 0.0 : static_cast<double>(solved) / static_cast<double>(problems); }
};

/// Lines are "problem TAB hypothesis [TAB task]" in prefix notation; the
/// task defaults to default_task. Several lines may share a problem; it is
/// solved if any of its hypotheses is valid.
BatchReport verify_batch(std::istream& in, const ProbeConfig& cfg = {}, Task default_task = Task::Bwd);

/// JSON-lines rendering: {line, outcome, method, max_residual}.
void write_report(std::ostream& out, const BatchReport& report);

}  // namespace symgen
