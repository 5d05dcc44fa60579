#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symgen/integration.hpp"

namespace symgen {

struct BridgeResponse {
  /// Absent when the worker could not read the request's id.
  std::optional<std::uint64_t> id;
  std::string status;  // ok | failed | timeout
  /// Prefix string or boolean, when the worker sent one.
  std::optional<std::string> text;
  std::optional<bool> flag;
  std::string diagnostic;

  bool ok() const { return status == "ok"; }
};

/// JSON-lines client for a CAS worker process talking over stdio.
///
/// The worker prints a handshake object first; then every request line
/// {"id", "op", "payload", "timeout"} is answered by one line
/// {"id", "status", "result", "diagnostic"}. A worker that exits, sends
/// garbage, or stays silent past timeout + grace is reported as
/// OracleUnavailable.
class BridgeClient : public IntegratorOracle {
 public:
  /// argv[0] is looked up in PATH. Throws OracleUnavailable when the worker
  /// cannot be started or does not complete the handshake in time.
  explicit BridgeClient(const std::vector<std::string>& argv, double handshake_timeout = 10.0);
  ~BridgeClient() override;
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  /// Raw handshake line.
  const std::string& handshake() const { return handshake_; }
  int protocol_version() const { return protocol_; }
  const std::string& cas_identity() const { return cas_; }

  /// Payload is one prefix string, or several for multi-argument ops.
  BridgeResponse request(const std::string& op, const std::vector<std::string>& payload, double timeout);
  /// Sends a raw line (tests use this to exercise protocol errors) and waits
  /// for the next response.
  BridgeResponse send_raw(const std::string& line, double timeout);

  std::optional<Expression> integrate(const Expression& integrand, double timeout_seconds) override;
  /// nullopt when the worker could not decide.
  std::optional<bool> equivalent(const Expression& a, const Expression& b, double timeout_seconds);

  bool alive() const { return pid_ > 0; }
  /// Id the next request will carry.
  std::uint64_t next_id() const { return next_id_; }
  double grace_seconds = 1.0;

 private:
  std::string read_line(double deadline_seconds);
  void write_line(const std::string& line);
  BridgeResponse await(std::optional<std::uint64_t> id, double timeout);
  void shutdown();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
  std::string handshake_;
  int protocol_ = 0;
  std::string cas_;
};

}  // namespace symgen
