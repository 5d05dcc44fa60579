#pragma once

#include <array>
#include <optional>
#include <vector>

#include "symgen/expr.hpp"

namespace symgen {

/// Outcome of numerically evaluating an expression over the reals.
struct EvalResult {
  enum class Kind { Finite, PosInf, NegInf, NaN, Complex, DomainError };
  Kind kind = Kind::Finite;
  double value = 0.0;
  /// Largest magnitude of any finite intermediate value, used to reject
  /// badly conditioned probe points.
  double max_magnitude = 0.0;

  bool finite() const { return kind == Kind::Finite; }
  static EvalResult real(double v);
  static EvalResult failure(Kind k);
};

/// Values bound to symbols. Unbound symbols make evaluation fail with
/// DomainError rather than throwing. e and pi are bound by default.
class Bindings {
 public:
  Bindings();
  Bindings& set(Symbol s, double v);
  std::optional<double> get(Symbol s) const;
  void unset(Symbol s);

 private:
  std::array<double, kAllSymbols.size()> values_{};
  std::array<bool, kAllSymbols.size()> bound_{};
};

/// Bottom-up evaluation. Never throws: domain problems come back as
/// non-finite/complex/domain-error results.
EvalResult evaluate(const Expression& e, const Bindings& b);

/// The same evaluation carried out in 50 significant digits, rounded to
/// double at the end; nullopt unless the result is a finite real. Much slower
/// than evaluate; used to recheck points where double rounding is suspect.
std::optional<double> evaluate_precise(const Expression& e, const Bindings& b);

/// Symbolic derivative with respect to var; every other symbol is treated as
/// a constant. The result is simplified. Throws UnsupportedOperator for
/// operators without a derivative rule.
Expression differentiate(const Expression& e, Symbol var);

/// d/dx of e where y is an unknown function of x: y -> y', y' -> y''.
/// Throws UnsupportedOperator when e already contains y''.
Expression total_derivative(const Expression& e);

/// Derivative rules before simplification (exposed for tests and tools).
Expression differentiate_raw(const Expression& e, Symbol var, bool y_depends_on_var);

/// Values probed for c, c1, c2 when checking validity of constant subtrees.
std::vector<double> default_constant_probes();

/// True iff every maximal subtree free of variables (x, y, z, y', y'')
/// evaluates to a finite real. Integration constants are probed over the
/// given values and must be finite for all of them.
bool is_valid_expression(const Expression& e, const std::vector<double>& constant_probes = default_constant_probes());

/// Central difference (f(p+h) - f(p-h)) / 2h with the other symbols bound as
/// in b. Throws ProbeFailed when either side is not finite.
double finite_difference(const Expression& e, Symbol var, double point, double h, Bindings b = {});

}  // namespace symgen
