#include "symgen/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "symgen/errors.hpp"
#include "symgen/hashing.hpp"

namespace symgen {

using nlohmann::json;

GenConfig RunConfig::gen_config() const {
  GenConfig g;
  g.grammar = grammar;
  g.max_tokens = max_tokens;
  g.max_rejections = max_rejections;
  g.oracle_timeout = oracle_timeout;
  g.ibp_max_nodes = ibp_max_nodes;
  g.probes = probes;
  return g;
}

OdeConfig RunConfig::ode_config() const {
  OdeConfig o;
  o.grammar = grammar;
  o.max_tokens = static_cast<int>(max_tokens);
  o.max_rejections = max_rejections;
  return o;
}

void RunConfig::validate() const {
  grammar.validate();
  probes.validate();
  if (mode != TreeMode::Binary && grammar.unary_ops.empty()) {
    throw InvalidConfig("unary-binary and weighted modes need at least one unary operator");
  }
  if (shards < 1) throw InvalidConfig("shards must be >= 1");
  if (max_tokens < 1) throw InvalidConfig("max_tokens must be >= 1");
  if (max_rejections < 1) throw InvalidConfig("max_rejections must be >= 1");
  if (ibp_max_nodes < 1) throw InvalidConfig("ibp_max_nodes must be >= 1");
  if (!(oracle_timeout > 0)) throw InvalidConfig("oracle_timeout must be positive");
}

// ---------------------------------------------------------------------------
// Settings

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long r = std::stoll(v, &pos);
    if (pos == v.size()) return r;
  } catch (const std::exception&) {
  }
  throw InvalidConfig("setting '" + key + "' expects an integer, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long r = std::stoull(v, &pos, 0);
      if (pos == v.size()) return r;
    }
  } catch (const std::exception&) {
  }
  throw InvalidConfig("setting '" + key + "' expects a non-negative integer, got '" + v + "'");
}

std::size_t to_count(const std::string& key, const std::string& v) { return static_cast<std::size_t>(to_u64(key, v)); }

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos == v.size()) return r;
  } catch (const std::exception&) {
  }
  throw InvalidConfig("setting '" + key + "' expects a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidConfig("setting '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<Op> to_ops(const std::string& key, const std::string& v) {
  std::vector<Op> out;
  for (const auto& item : split_list(v)) {
    auto op = op_from_token(item);
    if (!op) throw InvalidConfig("setting '" + key + "': unknown operator '" + item + "'");
    out.push_back(*op);
  }
  return out;
}

std::vector<Symbol> leaf_symbols_of(const GrammarConfig& g) {
  std::vector<Symbol> out;
  for (const auto& leaf : g.leaves) {
    if (leaf.is_symbol()) out.push_back(leaf.symbol());
  }
  return out;
}

void rebuild_leaves(GrammarConfig& g, const std::vector<Symbol>& symbols) {
  if (g.int_min > g.int_max) throw InvalidConfig("int_min must not exceed int_max");
  g.leaves = make_leaves(symbols, g.int_min, g.int_max, g.exclude_zero);
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  GrammarConfig& g = cfg.grammar;
  if (key == "seed") cfg.seed = to_u64(key, value);
  else if (key == "count") cfg.count = to_count(key, value);
  else if (key == "shards") cfg.shards = static_cast<int>(to_int(key, value));
  else if (key == "mode") cfg.mode = tree_mode_from_string(value);
  else if (key == "max_internal_nodes" || key == "n") g.max_internal_nodes = static_cast<int>(to_int(key, value));
  else if (key == "unary_ops") g.unary_ops = to_ops(key, value);
  else if (key == "binary_ops") g.binary_ops = to_ops(key, value);
  else if (key == "leaf_symbols") {
    std::vector<Symbol> symbols;
    for (const auto& item : split_list(value)) {
      auto s = symbol_from_token(item);
      if (!s) throw InvalidConfig("setting 'leaf_symbols': unknown symbol '" + item + "'");
      symbols.push_back(*s);
    }
    rebuild_leaves(g, symbols);
  } else if (key == "int_min" || key == "int_max" || key == "exclude_zero") {
    const auto symbols = leaf_symbols_of(g);
    if (key == "int_min") g.int_min = to_int(key, value);
    else if (key == "int_max") g.int_max = to_int(key, value);
    else g.exclude_zero = to_bool(key, value);
    rebuild_leaves(g, symbols);
  } else if (key == "unary_weights") g.unary_weights = to_doubles(key, value);
  else if (key == "binary_weights") g.binary_weights = to_doubles(key, value);
  else if (key == "leaf_weights") g.leaf_weights = to_doubles(key, value);
  else if (key == "max_tokens") cfg.max_tokens = to_count(key, value);
  else if (key == "max_rejections") cfg.max_rejections = to_count(key, value);
  else if (key == "ibp_max_nodes") cfg.ibp_max_nodes = static_cast<int>(to_int(key, value));
  else if (key == "oracle_timeout") cfg.oracle_timeout = to_double(key, value);
  else if (key == "probes") cfg.probes.probes = static_cast<int>(to_int(key, value));
  else if (key == "rel_tol") cfg.probes.rel_tol = to_double(key, value);
  else if (key == "min_survivors") cfg.probes.min_survivors = static_cast<int>(to_int(key, value));
  else if (key == "max_rounds") cfg.probes.max_rounds = static_cast<int>(to_int(key, value));
  else if (key == "x_min") cfg.probes.x_min = to_double(key, value);
  else if (key == "x_max") cfg.probes.x_max = to_double(key, value);
  else if (key == "random_sign") cfg.probes.random_sign = to_bool(key, value);
  else if (key == "constant_values") cfg.probes.constant_values = to_doubles(key, value);
  else if (key == "magnitude_limit") cfg.probes.magnitude_limit = to_double(key, value);
  else if (key == "probe_seed") cfg.probes.seed = to_u64(key, value);
  else if (key == "numeric_only") cfg.probes.numeric_only = to_bool(key, value);
  else throw InvalidConfig("unknown setting '" + key + "'");
}

namespace {

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ',';
      out += json_scalar(item);
    }
    return out;
  }
  return v.dump();
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    if (j.contains("config") && j["config"].is_object()) j = j["config"];
    // Leaf settings depend on each other; apply the symbol list first.
    if (j.contains("leaf_symbols")) apply_setting(cfg, "leaf_symbols", json_scalar(j["leaf_symbols"]));
    for (const auto& [key, value] : j.items()) {
      if (key != "leaf_symbols") apply_setting(cfg, key, json_scalar(value));
    }
    return;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    apply_setting(cfg, key, value);
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

std::string config_json(const RunConfig& cfg) {
  const GrammarConfig& g = cfg.grammar;
  auto ops = [](const std::vector<Op>& v) {
    json a = json::array();
    for (Op op : v) a.push_back(std::string(token(op)));
    return a;
  };
  json symbols = json::array();
  for (Symbol s : leaf_symbols_of(g)) symbols.push_back(std::string(token(s)));
  json j{{"seed", cfg.seed},
         {"count", cfg.count},
         {"shards", cfg.shards},
         {"mode", to_string(cfg.mode)},
         {"max_internal_nodes", g.max_internal_nodes},
         {"unary_ops", ops(g.unary_ops)},
         {"binary_ops", ops(g.binary_ops)},
         {"leaf_symbols", symbols},
         {"int_min", g.int_min},
         {"int_max", g.int_max},
         {"exclude_zero", g.exclude_zero},
         {"unary_weights", g.unary_weights},
         {"binary_weights", g.binary_weights},
         {"leaf_weights", g.leaf_weights},
         {"max_tokens", cfg.max_tokens},
         {"max_rejections", cfg.max_rejections},
         {"ibp_max_nodes", cfg.ibp_max_nodes},
         {"oracle_timeout", cfg.oracle_timeout},
         {"probes", cfg.probes.probes},
         {"rel_tol", cfg.probes.rel_tol},
         {"min_survivors", cfg.probes.min_survivors},
         {"max_rounds", cfg.probes.max_rounds},
         {"x_min", cfg.probes.x_min},
         {"x_max", cfg.probes.x_max},
         {"random_sign", cfg.probes.random_sign},
         {"constant_values", cfg.probes.constant_values},
         {"magnitude_limit", cfg.probes.magnitude_limit},
         {"probe_seed", cfg.probes.seed},
         {"numeric_only", cfg.probes.numeric_only}};
  return j.dump();
}

// ---------------------------------------------------------------------------
// Generation

Example to_example(const OdeExample& ode) {
  return Example{ode.equation, ode.solution, ode.order == 2 ? Task::Ode2 : Task::Ode1};
}

namespace {

struct ShardOutput {
  std::vector<Example> examples;
  GenCounters counters;
  OdeCounters ode_counters;
  PairStore store;
  std::optional<std::string> error;
};

void add_counters(GenCounters& into, const GenCounters& from) {
  for (const auto& [k, v] : from.rejected) into.rejected[k] += v;
  into.attempts += from.attempts;
  into.emitted += from.emitted;
  into.oracle_calls += from.oracle_calls;
  into.oracle_failures += from.oracle_failures;
}

void add_counters(OdeCounters& into, const OdeCounters& from) {
  for (const auto& [k, v] : from.rejected) into.rejected[k] += v;
  into.attempts += from.attempts;
  into.emitted += from.emitted;
  into.c1_attempts += from.c1_attempts;
  into.c1_skipped += from.c1_skipped;
}

void run_shard(Task task, const RunConfig& cfg, const SubtreeTable& table, std::size_t count, std::uint64_t seed,
               const OracleFactory& oracle_factory, std::set<std::string>* seen, ShardOutput& out) {
  Rng rng(seed);
  const GenConfig gen = cfg.gen_config();
  auto sink = [&](const Example& ex) { out.examples.push_back(ex); };
  try {
    switch (task) {
      case Task::Bwd: gen_bwd(count, gen, table, rng, sink, out.counters, seen); break;
      case Task::Ibp: gen_ibp(count, gen, table, rng, out.store, sink, out.counters, seen); break;
      case Task::Fwd: {
        if (!oracle_factory) throw OracleUnavailable("FWD generation needs an integrator oracle");
        auto oracle = oracle_factory();
        gen_fwd(count, gen, table, rng, *oracle, sink, out.counters, seen);
        break;
      }
      case Task::Ode1:
      case Task::Ode2:
        gen_odes(task == Task::Ode1 ? 1 : 2, count, cfg.ode_config(), table, rng,
                 [&](const OdeExample& ex) { out.examples.push_back(to_example(ex)); }, out.ode_counters, seen);
        break;
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
}

}  // namespace

GenerationResult generate(Task task, const RunConfig& cfg, const OracleFactory& oracle, const PairStore* ibp_seed_store) {
  cfg.validate();
  const SubtreeTable table = build_tables(cfg.mode, cfg.grammar.max_internal_nodes, cfg.grammar);
  const std::size_t n = static_cast<std::size_t>(cfg.shards);
  std::vector<ShardOutput> shards(n);
  PairStore initial = PairStore::seeded();
  if (ibp_seed_store) initial.merge(*ibp_seed_store);
  for (auto& s : shards) {
    if (task == Task::Ibp) s.store = initial;
  }

  if (n == 1) {
    run_shard(task, cfg, table, cfg.count, shard_seed(cfg.seed, 0), oracle, nullptr, shards[0]);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t share = cfg.count / n + (i < cfg.count % n ? 1 : 0);
      workers.emplace_back(run_shard, task, std::cref(cfg), std::cref(table), share, shard_seed(cfg.seed, static_cast<int>(i)),
                           std::cref(oracle), nullptr, std::ref(shards[i]));
    }
    for (auto& w : workers) w.join();
  }

  GenerationResult result;
  std::set<std::string> seen;
  PairStore merged = initial;
  for (auto& s : shards) {
    for (auto& ex : s.examples) {
      if (seen.insert(ex.key()).second) result.examples.push_back(std::move(ex));
      else result.counters.reject("duplicate-across-shards");
    }
    add_counters(result.counters, s.counters);
    add_counters(result.ode_counters, s.ode_counters);
    if (task == Task::Ibp) merged.merge(s.store);
    if (s.error && !result.error) result.error = s.error;
  }
  if (!result.error && result.examples.size() < cfg.count) {
    ShardOutput top;
    top.store = std::move(merged);
    run_shard(task, cfg, table, cfg.count - result.examples.size(), shard_seed(cfg.seed, static_cast<int>(n)), oracle,
              &seen, top);
    for (auto& ex : top.examples) result.examples.push_back(std::move(ex));
    add_counters(result.counters, top.counters);
    add_counters(result.ode_counters, top.ode_counters);
    result.error = top.error;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Files and manifests

OutputFile write_output(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw Error("failed writing " + path);
  return OutputFile{path, git_blob_hash(content), static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'))};
}

std::string manifest_json(const Manifest& m) {
  json j{{"subcommand", m.subcommand}, {"tool_version", kToolVersion}, {"vocabulary_version", kVocabularyVersion}};
  j["config"] = m.config.empty() ? json::object() : json::parse(m.config);
  json outputs = json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"path", o.path}, {"git_hash", o.hash}, {"lines", o.lines}});
  j["outputs"] = outputs;
  if (m.stats) j["stats"] = json::parse(stats_json(*m.stats));
  j["counters"] = m.counters;
  if (m.error) j["error"] = *m.error;
  return j.dump(2);
}

SplitSpec parse_split(const std::string& text) {
  SplitSpec spec;
  double total = 0;
  for (const auto& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidConfig("split entries look like name=fraction, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    const double frac = to_double("split", item.substr(eq + 1));
    if (name.empty() || name == "train") throw InvalidConfig("split names must be non-empty and not 'train'");
    if (!(frac > 0)) throw InvalidConfig("split fractions must be positive");
    total += frac;
    spec.parts.emplace_back(name, frac);
  }
  if (spec.parts.empty()) throw InvalidConfig("empty split specification");
  if (total > 1.0) throw InvalidConfig("split fractions add up to more than 1");
  return spec;
}

std::string SplitSpec::assign(const std::string& key) const {
  const double f = split_fraction(key);
  double lo = 0;
  for (const auto& [name, frac] : parts) {
    if (f < lo + frac) return name;
    lo += frac;
  }
  return "train";
}

}  // namespace symgen
