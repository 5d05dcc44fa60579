#include "symgen/bridge.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"
#include "symgen/errors.hpp"

namespace symgen {

namespace {

using Clock = std::chrono::steady_clock;

BridgeResponse parse_response(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw OracleUnavailable("bridge sent a line that is not JSON: " + line);
  }
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) {
    throw OracleUnavailable("bridge response lacks a status: " + line);
  }
  BridgeResponse r;
  if (j.contains("id") && j["id"].is_number_unsigned()) r.id = j["id"].get<std::uint64_t>();
  r.status = j["status"].get<std::string>();
  if (j.contains("result")) {
    const auto& res = j["result"];
    if (res.is_string()) r.text = res.get<std::string>();
    else if (res.is_boolean()) r.flag = res.get<bool>();
  }
  if (j.contains("diagnostic") && j["diagnostic"].is_string()) r.diagnostic = j["diagnostic"].get<std::string>();
  return r;
}

}  // namespace

BridgeClient::BridgeClient(const std::vector<std::string>& argv, double handshake_timeout) {
  if (argv.empty()) throw OracleUnavailable("empty bridge command");
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw OracleUnavailable(std::string("pipe: ") + std::strerror(errno));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw OracleUnavailable(std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = fork();
  if (pid < 0) throw OracleUnavailable(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  try {
    handshake_ = read_line(handshake_timeout);
    auto j = nlohmann::json::parse(handshake_);
    protocol_ = j.value("protocol", 0);
    cas_ = j.value("cas", std::string());
    if (protocol_ != 1) throw OracleUnavailable("unsupported bridge protocol in handshake: " + handshake_);
  } catch (const nlohmann::json::exception&) {
    shutdown();
    throw OracleUnavailable("malformed bridge handshake: " + handshake_);
  } catch (...) {
    shutdown();
    throw;
  }
}

BridgeClient::~BridgeClient() { shutdown(); }

void BridgeClient::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  to_child_ = -1;
  if (pid_ > 0) {
    // Give the worker a moment to exit on EOF, then insist.
    bool exited = false;
    for (int i = 0; i < 50 && !exited; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) exited = true;
      else usleep(10000);
    }
    if (!exited) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }
  pid_ = -1;
  if (from_child_ >= 0) close(from_child_);
  from_child_ = -1;
}

std::string BridgeClient::read_line(double timeout_seconds) {
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_seconds));
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) {
      shutdown();
      throw OracleUnavailable("bridge did not answer within " + std::to_string(timeout_seconds) + " s");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = poll(&pfd, 1, static_cast<int>(left));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw OracleUnavailable(std::string("poll: ") + std::strerror(errno));
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      shutdown();
      throw OracleUnavailable("bridge worker exited");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void BridgeClient::write_line(const std::string& line) {
  if (to_child_ < 0) throw OracleUnavailable("bridge worker is not running");
  std::string data = line + '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = write(to_child_, data.data() + off, data.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      shutdown();
      throw OracleUnavailable("bridge worker closed its input");
    }
    off += static_cast<std::size_t>(n);
  }
}

BridgeResponse BridgeClient::await(std::optional<std::uint64_t> id, double timeout) {
  const auto start = Clock::now();
  while (true) {
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    BridgeResponse r = parse_response(read_line(timeout + grace_seconds - elapsed));
    // Late answers to earlier requests are skipped.
    if (!id || r.id == *id) return r;
  }
}

BridgeResponse BridgeClient::request(const std::string& op, const std::vector<std::string>& payload, double timeout) {
  const std::uint64_t id = next_id_++;
  nlohmann::json j{{"id", id}, {"op", op}, {"timeout", timeout}};
  if (payload.size() == 1) j["payload"] = payload.front();
  else j["payload"] = payload;
  write_line(j.dump());
  return await(id, timeout);
}

BridgeResponse BridgeClient::send_raw(const std::string& line, double timeout) {
  write_line(line);
  return await(std::nullopt, timeout);
}

std::optional<Expression> BridgeClient::integrate(const Expression& integrand, double timeout_seconds) {
  BridgeResponse r = request("integrate", {to_prefix_string(integrand)}, timeout_seconds);
  if (!r.ok() || !r.text) return std::nullopt;
  try {
    return parse_prefix(*r.text);
  } catch (const MalformedSequence&) {
    return std::nullopt;
  }
}

std::optional<bool> BridgeClient::equivalent(const Expression& a, const Expression& b, double timeout_seconds) {
  BridgeResponse r = request("equiv", {to_prefix_string(a), to_prefix_string(b)}, timeout_seconds);
  if (!r.ok() || !r.flag) return std::nullopt;
  return r.flag;
}

}  // namespace symgen
