#include <chrono>

#include "doctest.h"
#include "symgen/bridge.hpp"
#include "symgen/errors.hpp"
#include "symgen/infix.hpp"

using namespace symgen;

namespace {

std::vector<std::string> worker(std::vector<std::string> extra = {}) {
  std::vector<std::string> argv{"python3", std::string(SYMGEN_SOURCE_DIR) + "/tests/fake_bridge.py"};
  argv.insert(argv.end(), extra.begin(), extra.end());
  return argv;
}

}  // namespace

TEST_CASE("handshake") {
  BridgeClient client(worker());
  CHECK(client.protocol_version() == 1);
  CHECK(client.cas_identity() == "fake-table");
}

TEST_CASE("one hundred scripted requests") {
  BridgeClient client(worker());
  int ok = 0, failed = 0, timeouts = 0, malformed = 0;
  for (int i = 0; i < 100; ++i) {
    BridgeResponse r;
    if (i == 37) {
      r = client.send_raw("{this is not json", 2.0);
      CHECK_FALSE(r.id.has_value());
      CHECK(r.diagnostic.find("malformed") != std::string::npos);
      ++malformed;
    } else if (i == 61) {
      const auto id = client.next_id();
      r = client.request("sleep", {"5"}, 0.2);
      CHECK(r.id == id);
      CHECK(r.status == "timeout");
      ++timeouts;
    } else {
      const auto id = client.next_id();
      const char* payload = i % 3 == 0 ? "sin x" : i % 3 == 1 ? "cos x" : "log x";
      r = client.request("integrate", {payload}, 2.0);
      CHECK(r.id == id);
      if (r.ok()) ++ok;
      else ++failed;
    }
    CHECK((r.status == "ok" || r.status == "failed" || r.status == "timeout"));
  }
  CHECK(ok + failed + timeouts + malformed == 100);
  CHECK(timeouts == 1);
  CHECK(malformed == 1);
  CHECK(failed == 33);
}

TEST_CASE("integrate and equivalent through the client") {
  BridgeClient client(worker());
  CHECK(client.integrate(parse_infix("sin(x)"), 2.0) == parse_prefix("* - 1 cos x"));
  CHECK_FALSE(client.integrate(parse_infix("log(x)"), 2.0).has_value());
  CHECK(client.equivalent(parse_infix("x"), parse_infix("x"), 2.0) == true);
  CHECK(client.equivalent(parse_infix("x"), parse_infix("x + 1"), 2.0) == false);
}

TEST_CASE("transport failures become OracleUnavailable") {
  SUBCASE("worker exits") {
    BridgeClient client(worker({"--exit-after", "1"}));
    CHECK(client.integrate(parse_infix("sin(x)"), 1.0).has_value());
    CHECK_THROWS_AS(client.integrate(parse_infix("sin(x)"), 1.0), OracleUnavailable);
  }
  SUBCASE("worker hangs") {
    BridgeClient client(worker({"--hang"}));
    const auto start = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(client.integrate(parse_infix("sin(x)"), 0.3), OracleUnavailable);
    const double waited = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(waited < 0.3 + client.grace_seconds + 1.0);
  }
  SUBCASE("bad handshake") { CHECK_THROWS_AS(BridgeClient(worker({"--bad-handshake"})), OracleUnavailable); }
  SUBCASE("missing program") { CHECK_THROWS_AS(BridgeClient({"/nonexistent/worker"}, 2.0), OracleUnavailable); }
}
