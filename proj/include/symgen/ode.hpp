#pragma once

#include <functional>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include "symgen/expr.hpp"
#include "symgen/grammar.hpp"
#include "symgen/sampler.hpp"
#include "symgen/verify.hpp"

namespace symgen {

/// target = expr, obtained by inverting the operators on the path to target.
struct SolvedForm {
  Symbol target = Symbol::C;
  Expression expr;
  std::vector<std::string> trace;  // inverted operators, outermost first
};

/// Replaces one uniformly chosen leaf by the symbol.
Expression plant_constant(const Expression& f, Symbol constant, Rng& rng);

/// Solves lhs = value for target, which must occur exactly once in lhs.
/// Throws MultipleOccurrences or NotInvertiblePath.
SolvedForm solve_for_symbol(const Expression& lhs, const Expression& value, Symbol target);

struct OdeExample {
  Expression equation;  // left side of "= 0"
  Expression solution;  // in x and the integration constants
  int order = 1;
};

/// Per-stage rejection counters, keyed by stage name.
struct OdeCounters {
  std::map<std::string, std::size_t> rejected;
  std::size_t attempts = 0;
  std::size_t emitted = 0;
  /// Second order only: attempts that reached the c1 solve, and how many of
  /// those could not isolate c1.
  std::size_t c1_attempts = 0;
  std::size_t c1_skipped = 0;

  void reject(const std::string& stage) { ++rejected[stage]; }
  double c1_skip_rate() const {
    return c1_attempts == 0 ? 0.0 : static_cast<double>(c1_skipped) / static_cast<double>(c1_attempts);
  }
};

struct OdeConfig {
  GrammarConfig grammar = GrammarConfig::dataset_default();
  int max_tokens = 512;
  /// Every emitted example is checked under each of these probe seeds.
  std::vector<std::uint64_t> gate_seeds{0x5eed5eedULL, 0x0dd5eedULL};
  /// Probe points per gate seed.
  int gate_probes = 50;
  /// Consecutive failed attempts before gen_odes gives up (RetriesExhausted).
  std::size_t max_rejections = 10000;
};

/// The equation obtained from a solution family f(x, c) by solving in c and
/// differentiating; nullopt with a counter bump when a stage fails.
std::optional<OdeExample> ode1_from_solution(const Expression& f_c, const OdeConfig& cfg, OdeCounters& counters);
std::optional<OdeExample> ode2_from_solution(const Expression& f_c1c2, const OdeConfig& cfg, OdeCounters& counters);

/// One generation attempt; callers loop until they have enough examples.
std::optional<OdeExample> gen_ode1(const OdeConfig& cfg, const SubtreeTable& table, Rng& rng, OdeCounters& counters);
std::optional<OdeExample> gen_ode2(const OdeConfig& cfg, const SubtreeTable& table, Rng& rng, OdeCounters& counters);

/// Emits `count` examples of the given order with distinct equations.
/// `seen` holds equation keys already used (e.g. by other shards).
void gen_odes(int order, std::size_t count, const OdeConfig& cfg, const SubtreeTable& table, Rng& rng,
              const std::function<void(const OdeExample&)>& sink, OdeCounters& counters,
              std::set<std::string>* seen = nullptr);

}  // namespace symgen
