#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "symgen/errors.hpp"
#include "symgen/hashing.hpp"
#include "symgen/pipeline.hpp"

using namespace symgen;

TEST_CASE("settings by key") {
  RunConfig cfg;
  apply_setting(cfg, "seed", "42");
  apply_setting(cfg, "mode", "binary");
  apply_setting(cfg, "unary_ops", "sin,cos");
  apply_setting(cfg, "int_min", "-2");
  apply_setting(cfg, "int_max", "2");
  apply_setting(cfg, "rel_tol", "1e-8");
  CHECK(cfg.seed == 42);
  CHECK(cfg.mode == TreeMode::Binary);
  CHECK(cfg.grammar.unary_ops == std::vector<Op>{Op::Sin, Op::Cos});
  CHECK(cfg.grammar.leaves.size() == 5);
  CHECK(cfg.probes.rel_tol == 1e-8);
  CHECK_THROWS_AS(apply_setting(cfg, "seed", "-1"), InvalidConfig);
  CHECK_THROWS_AS(apply_setting(cfg, "count", "many"), InvalidConfig);
  CHECK_THROWS_AS(apply_setting(cfg, "unary_ops", "sin,frobnicate"), InvalidConfig);
  CHECK_THROWS_AS(apply_setting(cfg, "colour", "red"), InvalidConfig);
}

TEST_CASE("config text formats") {
  RunConfig a;
  apply_config_text(a, "# comment\nseed = 7\ncount=12\n\nleaf_symbols = x\n");
  CHECK(a.seed == 7);
  CHECK(a.count == 12);
  RunConfig b;
  apply_config_text(b, R"({"seed": 7, "count": 12, "numeric_only": false})");
  CHECK(b.seed == 7);
  CHECK_FALSE(b.probes.numeric_only);
  CHECK_THROWS_AS(apply_config_text(b, "seed 7"), InvalidConfig);
  CHECK_THROWS_AS(apply_config_text(b, "{\"seed\": "), InvalidConfig);
}

TEST_CASE("config survives a manifest round trip") {
  RunConfig cfg;
  apply_setting(cfg, "seed", "99");
  apply_setting(cfg, "binary_ops", "+,*");
  apply_setting(cfg, "unary_weights", "2,1,1,1,1,1,1,1,1,1,1,1,1,1,1");
  CHECK_NOTHROW(cfg.validate());
  Manifest m;
  m.subcommand = "gen-bwd";
  m.config = config_json(cfg);
  RunConfig back;
  apply_config_text(back, manifest_json(m));
  CHECK(config_json(back) == config_json(cfg));
}

TEST_CASE("validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.shards = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = RunConfig{};
  cfg.grammar.binary_ops.clear();
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("generation is a function of the config") {
  RunConfig cfg;
  cfg.count = 60;
  cfg.shards = 3;
  cfg.seed = 11;
  const auto a = generate(Task::Bwd, cfg);
  const auto b = generate(Task::Bwd, cfg);
  REQUIRE_FALSE(a.error.has_value());
  REQUIRE(a.examples.size() == 60);
  std::set<std::string> keys;
  for (std::size_t i = 0; i < a.examples.size(); ++i) {
    CHECK(a.examples[i].key() == b.examples[i].key());
    keys.insert(a.examples[i].key());
  }
  CHECK(keys.size() == 60);
  cfg.seed = 12;
  CHECK(generate(Task::Bwd, cfg).examples.front().key() != a.examples.front().key());
}

TEST_CASE("ode and ibp generation through the pipeline") {
  RunConfig cfg;
  cfg.count = 8;
  cfg.shards = 2;
  for (Task t : {Task::Ibp, Task::Ode1, Task::Ode2}) {
    const auto r = generate(t, cfg);
    CAPTURE(to_string(t));
    CHECK_FALSE(r.error.has_value());
    CHECK(r.examples.size() == 8);
    for (const auto& e : r.examples) CHECK(e.task == t);
  }
}

TEST_CASE("generator failures keep partial output") {
  RunConfig cfg;
  cfg.count = 5;
  cfg.max_tokens = 2;
  cfg.max_rejections = 10;
  const auto r = generate(Task::Bwd, cfg);
  CHECK(r.error.has_value());
  CHECK(r.examples.empty());
  const auto fwd = generate(Task::Fwd, RunConfig{});
  REQUIRE(fwd.error.has_value());
  CHECK(fwd.error->find("oracle") != std::string::npos);
}

TEST_CASE("content hashes match git") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  const std::string path = "test_pipeline_output.txt";
  const OutputFile f = write_output(path, "a\nb\n");
  CHECK(f.lines == 2);
  CHECK(f.hash == git_blob_hash("a\nb\n"));
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "a");
  std::remove(path.c_str());
}

TEST_CASE("hash splits") {
  const SplitSpec s = parse_split("valid=0.1,test=0.1");
  REQUIRE(s.parts.size() == 2);
  std::map<std::string, int> counts;
  for (int i = 0; i < 2000; ++i) ++counts[s.assign("k" + std::to_string(i))];
  CHECK(counts["valid"] > 140);
  CHECK(counts["valid"] < 260);
  CHECK(counts["test"] > 140);
  CHECK(counts["train"] > 1450);
  CHECK(s.assign("same") == s.assign("same"));
  CHECK_THROWS_AS(parse_split("valid=0.7,test=0.5"), InvalidConfig);
  CHECK_THROWS_AS(parse_split("valid"), InvalidConfig);
  CHECK_THROWS_AS(parse_split("train=0.1"), InvalidConfig);
}

TEST_CASE("manifest contents") {
  Manifest m;
  m.subcommand = "gen-ode1";
  m.config = config_json(RunConfig{});
  m.outputs.push_back({"out.txt", "abc", 3});
  m.counters["attempts"] = 10;
  m.error = "stopped";
  const auto j = nlohmann::json::parse(manifest_json(m));
  CHECK(j["subcommand"] == "gen-ode1");
  CHECK(j["tool_version"] == kToolVersion);
  CHECK(j["vocabulary_version"] == kVocabularyVersion);
  CHECK(j["outputs"][0]["git_hash"] == "abc");
  CHECK(j["counters"]["attempts"] == 10);
  CHECK(j["error"] == "stopped");
  CHECK(j["config"]["seed"] == 0);
}
