#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "symgen/hashing.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded.
Run cli(const std::string& args) {
  const std::string cmd = std::string(SYMGEN_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("symgen-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("gen-bwd").code == 2);
  CHECK(cli("gen-bwd --out /dev/null --set colour=red").code == 2);
  CHECK(cli("gen-bwd --out /dev/null --count lots").code == 2);
  CHECK(cli("diff 'sin'").code == 2);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("count prints exact numbers") {
  const Run r = cli("count --n-max 4");
  CHECK(r.code == 0);
  CHECK(r.out == "n,catalan,schroeder,expressions\n0,1,1,11\n1,1,2,649\n2,2,6,66847\n3,5,22,8570045\n4,14,90,1229784259\n");
}

TEST_CASE("expression tools") {
  CHECK(cli("diff '* x x'").out == "* + 2 x\n");
  CHECK(cli("diff --infix --format infix 'sin(x)'").out == "cos(x)\n");
  CHECK(cli("simplify '- x x'").out == "+ 0\n");
  const auto rep = nlohmann::json::parse(cli("simplify --report '+ x x'").out);
  CHECK(rep["result"] == "* + 2 x");
  CHECK(cli("sample --count 5 --seed 3").out == cli("sample --count 5 --seed 3").out);
  CHECK(cli("vocab").out.find("\tsin\n") != std::string::npos);
  CHECK(nlohmann::json::parse(cli("rules").out).contains("rules"));
}

TEST_CASE("generate, then verify, clean and summarize") {
  TempDir dir;
  const std::string data = dir / "bwd.txt";
  const Run gen = cli("gen-bwd --count 30 --seed 5 --out " + data);
  REQUIRE(gen.code == 0);
  const std::string content = slurp(data);
  CHECK(std::count(content.begin(), content.end(), '\n') == 30);

  const auto manifest = nlohmann::json::parse(slurp(data + ".manifest.json"));
  CHECK(manifest["subcommand"] == "gen-bwd");
  CHECK(manifest["config"]["seed"] == 5);
  CHECK(manifest["outputs"][0]["git_hash"] == symgen::git_blob_hash(content));
  CHECK(manifest["stats"]["count"] == 30);

  // the manifest replays the run
  const std::string again = dir / "again.txt";
  REQUIRE(cli("gen-bwd --config " + data + ".manifest.json --out " + again).code == 0);
  CHECK(slurp(again) == content);
  // flags override the config file
  REQUIRE(cli("gen-bwd --config " + data + ".manifest.json --count 10 --out " + again).code == 0);
  CHECK(nlohmann::json::parse(slurp(again + ".manifest.json"))["config"]["count"] == 10);

  const Run ver = cli("verify --in " + data);
  CHECK(ver.code == 0);
  std::istringstream lines(ver.out);
  std::string line;
  int valid = 0;
  while (std::getline(lines, line)) valid += nlohmann::json::parse(line)["outcome"] == "valid";
  CHECK(valid == 30);

  const std::string cleaned = dir / "clean.txt";
  REQUIRE(cli("clean --in " + data + " --out " + cleaned).code == 0);
  CHECK(slurp(cleaned) == content);

  const auto stats = nlohmann::json::parse(cli("stats --in " + data).out);
  CHECK(stats["count"] == 30);
  CHECK(stats["mean_input"] > stats["mean_output"]);
}

TEST_CASE("splits write one file per part") {
  TempDir dir;
  const std::string data = dir / "ode.txt";
  REQUIRE(cli("gen-ode1 --count 40 --split valid=0.2,test=0.2 --out " + data).code == 0);
  std::size_t total = 0;
  for (const char* part : {"train", "valid", "test"}) {
    const std::string text = slurp(data + "." + part);
    total += static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  }
  CHECK(total == 40);
  CHECK(nlohmann::json::parse(slurp(data + ".manifest.json"))["outputs"].size() == 3);
}

TEST_CASE("forward generation through the bridge worker") {
  TempDir dir;
  const std::string data = dir / "fwd.txt";
  const std::string bridge = std::string("\"python3 ") + SYMGEN_SOURCE_DIR + "/tests/fake_bridge.py\"";
  REQUIRE(cli("gen-fwd --count 3 --n-max 1 --set max_rejections=3000 --bridge " + bridge + " --out " + data).code == 0);
  CHECK(cli("verify --task fwd --in " + data).out.find("invalid") == std::string::npos);
  CHECK(cli("gen-fwd --count 3 --bridge /nonexistent/worker --out " + data).code == 1);
}

TEST_CASE("runtime failures exit with 1") {
  TempDir dir;
  CHECK(cli("stats --in " + (dir / "missing.txt")).code != 0);
  std::ofstream(dir / "bad.txt") << "cos x\tsin x\nnot prefix at all\n";
  CHECK(cli("stats --in " + (dir / "bad.txt")).code == 1);
  CHECK(cli("gen-bwd --count 3 --max-tokens 2 --set max_rejections=5 --out " + (dir / "x.txt")).code == 1);
  CHECK(nlohmann::json::parse(slurp(dir / "x.txt.manifest.json")).contains("error"));
}
