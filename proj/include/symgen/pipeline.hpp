#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symgen/integration.hpp"
#include "symgen/ode.hpp"
#include "symgen/sampler.hpp"
#include "symgen/verify.hpp"

namespace symgen {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything that determines a run's output.
struct RunConfig {
  GrammarConfig grammar = GrammarConfig::dataset_default();
  TreeMode mode = TreeMode::UnaryBinary;
  std::uint64_t seed = 0;
  std::size_t count = 1000;
  int shards = 1;
  std::size_t max_tokens = 512;
  std::size_t max_rejections = 10000;
  int ibp_max_nodes = 5;
  double oracle_timeout = 10.0;
  ProbeConfig probes = GenConfig::gate_probes();

  GenConfig gen_config() const;
  OdeConfig ode_config() const;
  /// Throws InvalidConfig.
  void validate() const;
};

/// Sets one key (as used in config files). Throws InvalidConfig for unknown
/// keys or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Config text is either a JSON object or "key = value" lines ('#' starts a
/// comment). A run manifest is accepted too: its "config" object is used.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::string& path);

/// JSON object with every key understood by apply_setting.
std::string config_json(const RunConfig& cfg);

/// Creates one oracle per shard.
using OracleFactory = std::function<std::unique_ptr<IntegratorOracle>()>;

struct GenerationResult {
  std::vector<Example> examples;
  GenCounters counters;
  OdeCounters ode_counters;
  /// Set when the run stopped early; examples holds what was produced.
  std::optional<std::string> error;
};

/// Runs the generator for `task` over cfg.shards shards. Shard i uses seed
/// shard_seed(cfg.seed, i); duplicates across shards are dropped in shard
/// order and replaced by a final serial top-up, so the output is a pure
/// function of the config. The IBP store starts from PairStore::seeded()
/// merged with `ibp_seed_store` when given.
GenerationResult generate(Task task, const RunConfig& cfg, const OracleFactory& oracle = {},
                          const PairStore* ibp_seed_store = nullptr);

/// Converts a generated ODE example to the dataset record.
Example to_example(const OdeExample& ode);

struct OutputFile {
  std::string path;
  std::string hash;  // git blob id
  std::size_t lines = 0;
};

/// Writes content and reports its hash.
OutputFile write_output(const std::string& path, const std::string& content);

struct Manifest {
  std::string subcommand;
  std::string config;  // config_json
  std::vector<OutputFile> outputs;
  std::optional<DatasetStats> stats;
  std::map<std::string, double> counters;
  std::optional<std::string> error;
};

std::string manifest_json(const Manifest& m);

/// Splits keys by hashed fraction: names[i] receives fractions in
/// [sum(fractions[0..i-1]), sum(fractions[0..i])); the remainder goes to
/// "train". Text form: "valid=0.01,test=0.01".
struct SplitSpec {
  std::vector<std::pair<std::string, double>> parts;
  std::string assign(const std::string& key) const;
};
SplitSpec parse_split(const std::string& text);

}  // namespace symgen
