#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symgen/expr.hpp"

namespace symgen {

enum class RuleClass {
  Strict,          // equivalence on the common domain
  Reparametrize,   // renames an integration constant; has a witness
  Assumption,      // sound only under a stated assumption
  Normalization,   // equation-level (zero set preserved)
};

std::string to_string(RuleClass cls);

/// Descriptive registry entry. Patterns use the hole tokens u, v (arbitrary
/// subexpressions), n, m (nonzero integers) and k (a positive integer) inside
/// otherwise ordinary prefix notation. An empty replacement means "computed".
struct RewriteRule {
  std::string name;
  RuleClass cls = RuleClass::Strict;
  std::string pattern;
  std::string replacement;
  std::string assumption;
};

const std::vector<RewriteRule>& rule_registry();
/// JSON document listing every rule.
std::string rule_manifest();

struct SimplifyReport {
  Expression result;
  std::vector<std::string> rules_fired;  // sorted, unique
  int passes = 0;
};

/// Canonical algebraic simplification (strict rules only). Idempotent.
Expression simplify(const Expression& e);
SimplifyReport simplify_with_report(const Expression& e);

/// Like simplify but also distributes products over sums and expands small
/// integer powers of sums. Falls back to simplify when the expansion would
/// exceed max_terms terms.
Expression expand(const Expression& e, std::size_t max_terms = 400);

/// Records that, after reduction, constant `constant` stands for
/// `forward` evaluated at the previous value of the same constant.
struct Witness {
  Symbol constant = Symbol::C;
  Expression forward;
  std::string rule;
};

struct ConstantReduction {
  Expression result;
  std::vector<Witness> witnesses;
  std::vector<std::string> assumptions;  // names of assumption rules used
};

/// Absorbs variable-free siblings of integration constants into them and
/// collapses variable-free subtrees holding a single constant.
ConstantReduction reduce_constants_with_witness(const Expression& e, const std::vector<Symbol>& constants);
Expression reduce_constants(const Expression& e, const std::vector<Symbol>& constants);

/// Rebuilds the original expression from a reduced one via its witnesses.
Expression apply_witnesses(const Expression& reduced, const std::vector<Witness>& witnesses);

/// Puts the equation e = 0 into canonical form: expands, removes common
/// factors that are provably positive (or nonzero denominators in x),
/// clears x-monomial denominators and makes the coefficient of the first
/// term holding the highest derivative (else the first term) positive. Throws NoFactorRemains if nothing with a zero set is left.
Expression normalize_equation(const Expression& e);

/// e = coefficient * s + rest with neither part containing s, found after
/// expansion; nullopt when e is not linear in s or the coefficient is 0.
struct LinearForm {
  Expression coefficient;
  Expression rest;
};
std::optional<LinearForm> linear_in(const Expression& e, Symbol s);

/// Conservative sign provers over all real values of the variables where the
/// expression is defined.
bool is_provably_positive(const Expression& e);
bool is_provably_nonnegative(const Expression& e);

}  // namespace symgen
