#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "symgen/expr.hpp"
#include "symgen/grammar.hpp"
#include "symgen/sampler.hpp"
#include "symgen/verify.hpp"

namespace symgen {

struct Example {
  Expression problem;
  Expression solution;
  Task task = Task::Bwd;

  std::size_t problem_tokens() const { return problem.token_length(); }
  std::size_t solution_tokens() const { return solution.token_length(); }
  /// Canonical problem key used for deduplication and splitting.
  std::string key() const { return to_prefix_string(problem); }
};

/// "problem TAB solution", both in space-separated prefix tokens.
std::string format_example(const Example& ex);
/// Throws MalformedSequence.
Example parse_example(const std::string& line, Task task);

/// Simplifies both sides, then drops the example when either side is invalid
/// (undefined for every probe), longer than max_tokens, or mentions symbols
/// outside the task's alphabet.
std::optional<Example> clean(const Example& ex, std::size_t max_tokens = 512);

/// Known (function -> antiderivative) pairs keyed by the prefix of the
/// simplified function.
class PairStore {
 public:
  /// False when the key was already present (the stored pair is kept).
  bool insert(const Expression& function, const Expression& integral);
  std::optional<Expression> lookup(const Expression& function) const;
  bool contains(const Expression& function) const { return lookup(function).has_value(); }
  std::size_t size() const { return pairs_.size(); }
  /// Set union; existing keys win.
  void merge(const PairStore& other);
  const std::map<std::string, std::pair<Expression, Expression>>& pairs() const { return pairs_; }

  /// Built-in elementary antiderivatives.
  static PairStore seeded();

 private:
  std::map<std::string, std::pair<Expression, Expression>> pairs_;
};

/// Integrand -> antiderivative, or nullopt when it cannot integrate.
/// Throws OracleUnavailable on transport failure.
class IntegratorOracle {
 public:
  virtual ~IntegratorOracle() = default;
  virtual std::optional<Expression> integrate(const Expression& integrand, double timeout_seconds) = 0;
};

struct GenConfig {
  GrammarConfig grammar = GrammarConfig::dataset_default();
  std::size_t max_tokens = 512;
  /// Consecutive rejected attempts before RetriesExhausted.
  std::size_t max_rejections = 10000;
  double oracle_timeout = 10.0;
  /// Size cap for the F and G factors sampled by the IBP generator.
  int ibp_max_nodes = 5;
  ProbeConfig probes = gate_probes();

  static ProbeConfig gate_probes() {
    ProbeConfig p;
    p.numeric_only = true;
    return p;
  }
};

struct GenCounters {
  std::map<std::string, std::size_t> rejected;
  std::size_t attempts = 0;
  std::size_t emitted = 0;
  std::size_t oracle_calls = 0;
  std::size_t oracle_failures = 0;

  void reject(const std::string& stage) { ++rejected[stage]; }
  double oracle_failure_rate() const {
    return oracle_calls == 0 ? 0.0 : static_cast<double>(oracle_failures) / static_cast<double>(oracle_calls);
  }
};

using ExampleSink = std::function<void(const Example&)>;

/// Each generator emits `count` distinct examples (by problem key) to sink.
/// `seen` holds keys already used, e.g. by earlier shards; it is updated.
void gen_bwd(std::size_t count, const GenConfig& cfg, const SubtreeTable& table, Rng& rng, const ExampleSink& sink,
             GenCounters& counters, std::set<std::string>* seen = nullptr);
void gen_fwd(std::size_t count, const GenConfig& cfg, const SubtreeTable& table, Rng& rng, IntegratorOracle& oracle,
             const ExampleSink& sink, GenCounters& counters, std::set<std::string>* seen = nullptr);
/// New pairs found along the way (including the emitted ones) go into store.
void gen_ibp(std::size_t count, const GenConfig& cfg, const SubtreeTable& table, Rng& rng, PairStore& store,
             const ExampleSink& sink, GenCounters& counters, std::set<std::string>* seen = nullptr);

/// One BWD candidate (f', f) for a given f, after cleaning and the gate.
std::optional<Example> bwd_example(const Expression& f, const GenConfig& cfg, GenCounters& counters);

struct DatasetStats {
  std::size_t count = 0;
  double mean_input = 0, std_input = 0;
  double mean_output = 0, std_output = 0;
  /// mean_output / mean_input
  double length_ratio = 0;
  std::size_t max_input = 0, max_output = 0;
};

DatasetStats compute_stats(const std::vector<Example>& examples);
/// Throws FileMalformed naming the 1-based line.
DatasetStats compute_stats(std::istream& in);
std::string stats_json(const DatasetStats& s);

/// Fraction in [0, 1) derived from a hash of the key.
double split_fraction(const std::string& key);

}  // namespace symgen
