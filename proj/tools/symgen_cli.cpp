#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "symgen/bridge.hpp"
#include "symgen/calculus.hpp"
#include "symgen/counting.hpp"
#include "symgen/errors.hpp"
#include "symgen/infix.hpp"
#include "symgen/integration.hpp"
#include "symgen/pipeline.hpp"
#include "symgen/simplify.hpp"

using namespace symgen;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

// Raised for bad user input discovered after argument parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Settings from --config, then from flags, in command-line order.
struct Settings {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
    cfg.validate();
    return cfg;
  }
};

void add_setting(CLI::App* sub, Settings& s, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(flag, [&s, key](const std::string& v) { s.overrides.emplace_back(key, v); }, help);
}

void add_common(CLI::App* sub, Settings& s) {
  sub->add_option("--config", s.config_path, "config file (key = value lines, JSON, or a run manifest)");
  add_setting(sub, s, "--seed", "seed", "random seed");
  sub->add_option_function<std::vector<std::string>>(
      "--set",
      [&s](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + item + "'");
          s.overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
        }
      },
      "override any config key (key=value)");
}

void add_grammar(CLI::App* sub, Settings& s) {
  add_setting(sub, s, "--n-max", "max_internal_nodes", "maximum internal nodes");
  add_setting(sub, s, "--mode", "mode", "binary | unary-binary | weighted");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> input_lines(const std::vector<std::string>& args, const std::string& path) {
  std::vector<std::string> lines = args;
  if (!path.empty() || args.empty()) {
    std::istringstream file(path.empty() ? std::string() : read_file(path));
    std::istream& in = path.empty() ? std::cin : static_cast<std::istream&>(file);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }
  return lines;
}

Expression read_expr(const std::string& text, bool infix) {
  try {
    return infix ? parse_infix(text) : parse_prefix(text);
  } catch (const MalformedSequence& e) {
    throw UsageError("cannot parse '" + text + "': " + e.what());
  }
}

std::string render(const Expression& e, const std::string& format) {
  return format == "infix" ? to_infix(e) : to_prefix_string(e);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") std::cout << content;
  else write_output(out_path, content);
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(const std::string& out, const Manifest& m) { write_output(manifest_path(out), manifest_json(m) + "\n"); }

// ---------------------------------------------------------------------------

struct CountArgs {
  int n_max = 30;
  unsigned long long p1 = 15, p2 = 4, leaves = 11;
  bool asymptotic = false;
  std::string out;
};

int run_count(const CountArgs& a) {
  if (a.n_max < 0) throw UsageError("--n-max must be >= 0");
  if (a.p2 < 1 || a.leaves < 1) throw UsageError("--p2 and --L must be >= 1");
  std::ostringstream csv;
  csv << "n,catalan,schroeder,expressions";
  if (a.asymptotic) csv << ",catalan_approx,schroeder_approx,expressions_approx";
  csv << '\n';
  for (int n = 0; n <= a.n_max; ++n) {
    csv << n << ',' << counting::catalan(n) << ',' << counting::schroeder(n) << ','
        << counting::expression_count({n, a.p1, a.p2, a.leaves});
    if (a.asymptotic) {
      if (n >= 1 && a.p1 > 0) {
        const auto est = counting::asymptotic_counts({n, a.p1, a.p2, a.leaves});
        csv << ',' << est.catalan_approx << ',' << est.schroeder_approx << ',' << est.expression_approx;
      } else {
        csv << ",,,";
      }
    }
    csv << '\n';
  }
  emit(a.out, csv.str());
  if (!a.out.empty() && a.out != "-") {
    Manifest m;
    m.subcommand = "count";
    m.config = nlohmann::json{{"n_max", a.n_max}, {"p1", a.p1}, {"p2", a.p2}, {"L", a.leaves}, {"asymptotic", a.asymptotic}}.dump();
    m.outputs.push_back(write_output(a.out, csv.str()));
    write_manifest(a.out, m);
  }
  return 0;
}

struct SampleArgs {
  std::size_t count = 10;
  int n = 0;
  std::string format = "prefix";
  std::string out;
};

int run_sample(const SampleArgs& a, const Settings& s) {
  RunConfig cfg = s.resolve();
  const int n_max = std::max(cfg.grammar.max_internal_nodes, a.n);
  const SubtreeTable table = build_tables(cfg.mode, n_max, cfg.grammar);
  Rng rng(cfg.seed);
  std::ostringstream out;
  for (std::size_t i = 0; i < a.count; ++i) {
    const Expression e = a.n > 0 ? sample_expression(a.n, cfg.grammar, table, rng) : sample_function(cfg.grammar, table, rng);
    out << render(e, a.format) << '\n';
  }
  emit(a.out, out.str());
  if (!a.out.empty() && a.out != "-") {
    Manifest m;
    m.subcommand = "sample";
    cfg.count = a.count;
    m.config = config_json(cfg);
    m.outputs.push_back(write_output(a.out, out.str()));
    write_manifest(a.out, m);
  }
  return 0;
}

struct ExprArgs {
  std::vector<std::string> exprs;
  std::string in;
  bool infix = false;
  std::string format = "prefix";
  std::string var = "x";
  bool total = false;
  bool expand = false;
  bool reduce = false;
  bool normalize = false;
  bool report = false;
};

int run_diff(const ExprArgs& a) {
  auto var = symbol_from_token(a.var);
  if (!var || !is_variable(*var)) throw UsageError("--var must be one of x, y, z");
  for (const auto& line : input_lines(a.exprs, a.in)) {
    const Expression e = read_expr(line, a.infix);
    std::cout << render(a.total ? total_derivative(e) : differentiate(e, *var), a.format) << '\n';
  }
  return 0;
}

int run_simplify(const ExprArgs& a) {
  for (const auto& line : input_lines(a.exprs, a.in)) {
    Expression e = read_expr(line, a.infix);
    std::vector<std::string> fired;
    std::vector<std::string> assumptions;
    if (a.reduce) {
      auto r = reduce_constants_with_witness(e, {Symbol::C, Symbol::C1, Symbol::C2});
      e = r.result;
      assumptions = r.assumptions;
    }
    if (a.normalize) {
      e = normalize_equation(e);
    } else if (a.expand) {
      e = expand(e);
    } else {
      auto rep = simplify_with_report(e);
      e = rep.result;
      fired = rep.rules_fired;
    }
    if (a.report) {
      nlohmann::json j{{"result", render(e, a.format)}, {"rules_fired", fired}, {"assumptions", assumptions}};
      std::cout << j.dump() << '\n';
    } else {
      std::cout << render(e, a.format) << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string out;
  std::string split;
  std::vector<std::string> store_files;
  std::string bridge;
};

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::map<std::string, double> counter_map(Task task, const GenerationResult& r) {
  std::map<std::string, double> m;
  if (is_integration_task(task)) {
    m["attempts"] = static_cast<double>(r.counters.attempts);
    m["emitted"] = static_cast<double>(r.examples.size());
    for (const auto& [k, v] : r.counters.rejected) m["rejected." + k] = static_cast<double>(v);
    if (task == Task::Fwd) {
      m["oracle_calls"] = static_cast<double>(r.counters.oracle_calls);
      m["oracle_failures"] = static_cast<double>(r.counters.oracle_failures);
      m["oracle_failure_rate"] = r.counters.oracle_failure_rate();
    }
  } else {
    m["attempts"] = static_cast<double>(r.ode_counters.attempts);
    m["emitted"] = static_cast<double>(r.examples.size());
    for (const auto& [k, v] : r.ode_counters.rejected) m["rejected." + k] = static_cast<double>(v);
    for (const auto& [k, v] : r.counters.rejected) m["rejected." + k] += static_cast<double>(v);
    if (task == Task::Ode2) {
      m["c1_attempts"] = static_cast<double>(r.ode_counters.c1_attempts);
      m["c1_skipped"] = static_cast<double>(r.ode_counters.c1_skipped);
      m["c1_skip_rate"] = r.ode_counters.c1_skip_rate();
    }
  }
  return m;
}

int run_generate(Task task, const GenArgs& a, const Settings& s) {
  const RunConfig cfg = s.resolve();
  std::optional<SplitSpec> split;
  if (!a.split.empty()) split = parse_split(a.split);

  OracleFactory oracle;
  if (task == Task::Fwd) {
    const auto argv = split_words(a.bridge);
    if (argv.empty()) throw UsageError("gen-fwd needs --bridge \"command args...\"");
    oracle = [argv]() { return std::make_unique<BridgeClient>(argv); };
  }
  PairStore seeds;
  for (const auto& path : a.store_files) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        const Example ex = parse_example(line, Task::Bwd);
        seeds.insert(ex.problem, ex.solution);
      } catch (const MalformedSequence& e) {
        throw FileMalformed(path + " line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  const GenerationResult result = generate(task, cfg, oracle, a.store_files.empty() ? nullptr : &seeds);

  Manifest m;
  m.subcommand = "gen-" + to_string(task);
  m.config = config_json(cfg);
  m.stats = compute_stats(result.examples);
  m.counters = counter_map(task, result);
  m.error = result.error;
  if (split) {
    std::map<std::string, std::string> parts{{"train", ""}};
    for (const auto& [name, frac] : split->parts) parts[name] = "";
    for (const auto& ex : result.examples) parts[split->assign(ex.key())] += format_example(ex) + '\n';
    for (const auto& [name, content] : parts) m.outputs.push_back(write_output(a.out + "." + name, content));
  } else {
    std::string content;
    for (const auto& ex : result.examples) content += format_example(ex) + '\n';
    m.outputs.push_back(write_output(a.out, content));
  }
  write_manifest(a.out, m);

  std::cerr << m.subcommand << ": " << result.examples.size() << " examples";
  for (const auto& [k, v] : m.counters) std::cerr << ", " << k << '=' << v;
  std::cerr << '\n';
  if (result.error) {
    std::cerr << "error: " << *result.error << '\n';
    return kRuntimeError;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct FileArgs {
  std::string in;
  std::string out;
  std::string task = "bwd";
};

Task parse_task(const std::string& name) {
  auto t = task_from_string(name);
  if (!t) throw UsageError("unknown task '" + name + "' (fwd, bwd, ibp, ode1, ode2)");
  return *t;
}

int run_clean(const FileArgs& a, const Settings& s) {
  const RunConfig cfg = s.resolve();
  const Task task = parse_task(a.task);
  std::istringstream in(read_file(a.in));
  std::string line, content;
  std::set<std::string> seen;
  std::vector<Example> kept;
  std::size_t lineno = 0, filtered = 0, duplicates = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Example ex;
    try {
      ex = parse_example(line, task);
    } catch (const MalformedSequence& e) {
      throw FileMalformed(a.in + " line " + std::to_string(lineno) + ": " + e.what());
    }
    auto c = clean(ex, cfg.max_tokens);
    if (!c) {
      ++filtered;
      continue;
    }
    if (!seen.insert(c->key()).second) {
      ++duplicates;
      continue;
    }
    content += format_example(*c) + '\n';
    kept.push_back(std::move(*c));
  }
  Manifest m;
  m.subcommand = "clean";
  m.config = config_json(cfg);
  m.stats = compute_stats(kept);
  m.counters = {{"input", static_cast<double>(lineno)},
                {"kept", static_cast<double>(kept.size())},
                {"filtered", static_cast<double>(filtered)},
                {"duplicates", static_cast<double>(duplicates)}};
  if (a.out.empty() || a.out == "-") {
    std::cout << content;
  } else {
    m.outputs.push_back(write_output(a.out, content));
    write_manifest(a.out, m);
  }
  std::cerr << "clean: kept " << kept.size() << ", filtered " << filtered << ", duplicates " << duplicates << '\n';
  return 0;
}

int run_stats(const FileArgs& a) {
  std::istringstream in(read_file(a.in));
  std::cout << stats_json(compute_stats(in)) << '\n';
  return 0;
}

int run_verify(const FileArgs& a, const Settings& s) {
  const RunConfig cfg = s.resolve();
  const Task task = parse_task(a.task);
  std::istringstream in(read_file(a.in));
  const BatchReport report = verify_batch(in, cfg.probes, task);
  std::ostringstream out;
  write_report(out, report);
  emit(a.out, out.str());
  if (!a.out.empty() && a.out != "-") {
    Manifest m;
    m.subcommand = "verify";
    m.config = config_json(cfg);
    m.outputs.push_back(write_output(a.out, out.str()));
    std::size_t valid = 0, malformed = 0;
    for (const auto& lv : report.lines) {
      valid += lv.verdict.valid() ? 1 : 0;
      malformed += lv.malformed ? 1 : 0;
    }
    m.counters = {{"lines", static_cast<double>(report.lines.size())},
                  {"valid", static_cast<double>(valid)},
                  {"malformed", static_cast<double>(malformed)},
                  {"problems", static_cast<double>(report.problems)},
                  {"solved", static_cast<double>(report.solved)},
                  {"accuracy", report.accuracy()}};
    write_manifest(a.out, m);
  }
  std::cerr << "verify: " << report.solved << "/" << report.problems << " problems solved (accuracy " << report.accuracy()
            << ")\n";
  return 0;
}

int run_vocab() {
  const auto& v = vocabulary();
  for (std::size_t i = 0; i < v.size(); ++i) std::cout << i << '\t' << v[i] << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic-mathematics dataset toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CountArgs count_args;
  auto* count = app.add_subcommand("count", "tree and expression counts as CSV");
  count->add_option("--n-max", count_args.n_max, "largest n");
  count->add_option("--p1", count_args.p1, "unary operators");
  count->add_option("--p2", count_args.p2, "binary operators");
  count->add_option("--L", count_args.leaves, "leaf values");
  count->add_flag("--asymptotic", count_args.asymptotic, "add asymptotic estimates");
  count->add_option("--out", count_args.out, "output file (default stdout)");

  Settings sample_settings;
  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "random expressions");
  add_common(sample, sample_settings);
  add_grammar(sample, sample_settings);
  sample->add_option("--count", sample_args.count, "number of expressions");
  sample->add_option("--n", sample_args.n, "exact number of internal nodes (default: random, must contain x)");
  sample->add_option("--format", sample_args.format, "prefix | infix")->check(CLI::IsMember({"prefix", "infix"}));
  sample->add_option("--out", sample_args.out, "output file (default stdout)");

  ExprArgs diff_args;
  auto* diff = app.add_subcommand("diff", "symbolic derivative of each expression");
  diff->add_option("exprs", diff_args.exprs, "expressions (default: read lines from --in or stdin)");
  diff->add_option("--in", diff_args.in, "input file, one expression per line");
  diff->add_flag("--infix", diff_args.infix, "inputs are infix rather than prefix");
  diff->add_option("--format", diff_args.format, "prefix | infix")->check(CLI::IsMember({"prefix", "infix"}));
  diff->add_option("--var", diff_args.var, "variable (x, y, z)");
  diff->add_flag("--total", diff_args.total, "total derivative in x with y = y(x)");

  ExprArgs simp_args;
  auto* simp = app.add_subcommand("simplify", "canonical simplification of each expression");
  simp->add_option("exprs", simp_args.exprs, "expressions (default: read lines from --in or stdin)");
  simp->add_option("--in", simp_args.in, "input file, one expression per line");
  simp->add_flag("--infix", simp_args.infix, "inputs are infix rather than prefix");
  simp->add_option("--format", simp_args.format, "prefix | infix")->check(CLI::IsMember({"prefix", "infix"}));
  simp->add_flag("--expand", simp_args.expand, "also distribute products");
  simp->add_flag("--reduce-constants", simp_args.reduce, "absorb terms into c, c1, c2 first");
  simp->add_flag("--normalize", simp_args.normalize, "treat as an equation = 0 and normalize");
  simp->add_flag("--report", simp_args.report, "JSON lines with the rules that fired");

  auto* rules = app.add_subcommand("rules", "rewrite rule registry as JSON");
  auto* vocab = app.add_subcommand("vocab", "token vocabulary");

  struct GenCommand {
    Task task;
    Settings settings;
    GenArgs args;
    CLI::App* app = nullptr;
  };
  std::vector<std::unique_ptr<GenCommand>> gens;
  for (Task t : {Task::Fwd, Task::Bwd, Task::Ibp, Task::Ode1, Task::Ode2}) {
    auto g = std::make_unique<GenCommand>();
    g->task = t;
    g->app = app.add_subcommand("gen-" + to_string(t), "generate " + to_string(t) + " examples");
    add_common(g->app, g->settings);
    add_grammar(g->app, g->settings);
    add_setting(g->app, g->settings, "--count", "count", "number of examples");
    add_setting(g->app, g->settings, "--shards", "shards", "parallel workers");
    add_setting(g->app, g->settings, "--max-tokens", "max_tokens", "length limit per side");
    g->app->add_option("--out", g->args.out, "dataset file (a manifest is written beside it)")->required();
    g->app->add_option("--split", g->args.split, "hash split, e.g. valid=0.01,test=0.01");
    if (t == Task::Ibp) {
      g->app->add_option("--store", g->args.store_files, "BWD dataset files seeding the pair store");
      add_setting(g->app, g->settings, "--ibp-max-nodes", "ibp_max_nodes", "size cap for F and G");
    }
    if (t == Task::Fwd) {
      g->app->add_option("--bridge", g->args.bridge, "integrator worker command line")->required();
      add_setting(g->app, g->settings, "--oracle-timeout", "oracle_timeout", "seconds per integrand");
    }
    gens.push_back(std::move(g));
  }

  Settings clean_settings;
  FileArgs clean_args;
  auto* clean_cmd = app.add_subcommand("clean", "simplify, filter and deduplicate a dataset file");
  add_common(clean_cmd, clean_settings);
  add_setting(clean_cmd, clean_settings, "--max-tokens", "max_tokens", "length limit per side");
  clean_cmd->add_option("--in", clean_args.in, "dataset file")->required();
  clean_cmd->add_option("--out", clean_args.out, "output file (default stdout)");
  clean_cmd->add_option("--task", clean_args.task, "fwd | bwd | ibp | ode1 | ode2");

  FileArgs stats_args;
  auto* stats = app.add_subcommand("stats", "length statistics of a dataset file");
  stats->add_option("--in", stats_args.in, "dataset file")->required();

  Settings verify_settings;
  FileArgs verify_args;
  auto* verify = app.add_subcommand("verify", "check hypotheses: problem TAB hypothesis [TAB task]");
  add_common(verify, verify_settings);
  add_setting(verify, verify_settings, "--probes", "probes", "probe points per round");
  add_setting(verify, verify_settings, "--tol", "rel_tol", "relative tolerance");
  verify->add_option("--in", verify_args.in, "hypothesis file")->required();
  verify->add_option("--out", verify_args.out, "JSON-lines report (default stdout)");
  verify->add_option("--task", verify_args.task, "default task for lines without one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*count) return run_count(count_args);
    if (*sample) return run_sample(sample_args, sample_settings);
    if (*diff) return run_diff(diff_args);
    if (*simp) return run_simplify(simp_args);
    if (*rules) {
      std::cout << rule_manifest() << '\n';
      return 0;
    }
    if (*vocab) return run_vocab();
    for (const auto& g : gens) {
      if (*g->app) return run_generate(g->task, g->args, g->settings);
    }
    if (*clean_cmd) return run_clean(clean_args, clean_settings);
    if (*stats) return run_stats(stats_args);
    if (*verify) return run_verify(verify_args, verify_settings);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InvalidConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
