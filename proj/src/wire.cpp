#include "ddt/wire.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <json.hpp>
#include <thread>

#include "ddt/error.hpp"

namespace ddt::wire {
namespace {

using json = nlohmann::json;

constexpr char kHex[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string encode_double(double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[bits & 0xF];
    bits >>= 4;
  }
  return out;
}

double decode_double(std::string_view hex) {
  if (hex.size() != 16)
    throw ProtocolError("malformed element '" + std::string(hex) + "': expected 16 hex digits");
  std::uint64_t bits = 0;
  for (char c : hex) {
    const int v = hex_value(c);
    if (v < 0) throw ProtocolError("malformed element '" + std::string(hex) + "': bad hex digit");
    bits = (bits << 4) | static_cast<std::uint64_t>(v);
  }
  const double x = std::bit_cast<double>(bits);
  if (std::isnan(x)) throw ProtocolError("NaN is not allowed in matrix payloads");
  return x;
}

std::string encode_matrix(const Matrix& m) {
  std::string out;
  out.reserve(m.size() * 17);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (std::isnan(m.data[i]))
      throw ProtocolError("cannot encode NaN at element " + std::to_string(i));
    if (i) out.push_back(' ');
    out += encode_double(m.data[i]);
  }
  return out;
}

Matrix decode_matrix(std::string_view payload, std::size_t rows, std::size_t cols) {
  std::vector<double> data;
  data.reserve(rows * cols);
  // Exactly one space between tokens; no leading or trailing space.
  std::size_t pos = 0;
  while (!payload.empty()) {
    const std::size_t end = std::min(payload.find(' ', pos), payload.size());
    data.push_back(decode_double(payload.substr(pos, end - pos)));
    if (end == payload.size()) break;
    pos = end + 1;
  }
  if (data.size() != rows * cols)
    throw ProtocolError("payload has " + std::to_string(data.size()) + " elements, expected " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  return Matrix(rows, cols, std::move(data));
}

std::string make_hello(std::string_view impl_label) {
  return json{{"type", "hello"}, {"protocol_version", kProtocolVersion}, {"impl_label", impl_label}}
      .dump();
}

std::string make_eval_request(std::uint64_t trial_id, const Matrix& a, const Matrix& b) {
  return json{{"type", "eval_request"}, {"trial_id", trial_id},  {"rows_a", a.rows},
              {"cols_a", a.cols},       {"rows_b", b.rows},      {"cols_b", b.cols},
              {"data_a", encode_matrix(a)}, {"data_b", encode_matrix(b)}}
      .dump();
}

std::string make_eval_response(std::uint64_t trial_id, const Matrix& result) {
  return json{{"type", "eval_response"}, {"trial_id", trial_id}, {"rows", result.rows},
              {"cols", result.cols},     {"data", encode_matrix(result)}}
      .dump();
}

std::string make_error(std::uint64_t trial_id, std::string_view message) {
  return json{{"type", "error"}, {"trial_id", trial_id}, {"message", message}}.dump();
}

std::string make_shutdown() { return json{{"type", "shutdown"}}.dump(); }

struct ExternalImplementation::Process {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string buffer;
  std::string command;

  ~Process() {
    if (to_child >= 0) close(to_child);
    if (from_child >= 0) close(from_child);
    if (pid > 0) {
      // Give the child a moment to exit on its own after shutdown/EOF.
      for (int i = 0; i < 50; ++i) {
        if (waitpid(pid, nullptr, WNOHANG) == pid) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      // The shell may have forked the real server; take down the whole group.
      kill(-pid, SIGKILL);
      waitpid(pid, nullptr, 0);
    }
  }

  void write_line(const std::string& line) {
    std::string framed = line + "\n";
    const char* p = framed.data();
    std::size_t left = framed.size();
    while (left > 0) {
      const ssize_t n = ::write(to_child, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("write to '" + command + "' failed: " + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  std::string read_line(double timeout_s) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    for (;;) {
      const auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0)
        throw ProtocolError("timed out after " + std::to_string(timeout_s) + " s waiting for '" +
                            command + "'");
      pollfd pfd{from_child, POLLIN, 0};
      const int rc = poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (rc == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(from_child, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("read from '" + command + "' failed: " + std::strerror(errno));
      }
      if (n == 0) throw ProtocolError("'" + command + "' closed its output");
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }
};

namespace {

json parse_message(const std::string& line) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError("malformed message '" + line.substr(0, 80) + "': " + e.what());
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
    throw ProtocolError("message without a type field: '" + line.substr(0, 80) + "'");
  return msg;
}

template <typename T>
T field(const json& msg, const char* name) {
  if (!msg.contains(name)) throw ProtocolError(std::string("message lacks field '") + name + "'");
  try {
    return msg[name].get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

ExternalImplementation::ExternalImplementation(const ExternalEndpoint& endpoint)
    : proc_(std::make_unique<Process>()), timeout_s_(endpoint.timeout_s) {
  signal(SIGPIPE, SIG_IGN);
  proc_->command = endpoint.command;
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw Error(std::string("pipe failed: ") + std::strerror(errno));
  const pid_t pid = fork();
  if (pid < 0) throw Error(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", endpoint.command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);  // also from the parent, so kill(-pid) cannot race the child
  close(in_pipe[0]);
  close(out_pipe[1]);
  proc_->pid = pid;
  proc_->to_child = in_pipe[1];
  proc_->from_child = out_pipe[0];

  const json hello = parse_message(proc_->read_line(timeout_s_));
  if (hello["type"] != "hello")
    throw ProtocolError("expected hello from '" + endpoint.command + "', got " +
                        hello["type"].get<std::string>());
  const auto version = field<std::string>(hello, "protocol_version");
  if (version != kProtocolVersion)
    throw ProtocolError("protocol version mismatch: harness speaks " + std::string(kProtocolVersion) +
                        ", '" + endpoint.command + "' speaks " + version);
  label_ = field<std::string>(hello, "impl_label");
}

ExternalImplementation::~ExternalImplementation() {
  if (!proc_) return;
  try {
    proc_->write_line(make_shutdown());
  } catch (const Error&) {
    // child already gone
  }
}

Matrix ExternalImplementation::evaluate(std::uint64_t trial_id, const Matrix& a, const Matrix& b) {
  proc_->write_line(make_eval_request(trial_id, a, b));
  const json msg = parse_message(proc_->read_line(timeout_s_));
  const auto type = msg["type"].get<std::string>();
  if (type == "error")
    throw ProtocolError("implementation '" + label_ + "' failed on trial " + std::to_string(trial_id) +
                        ": " + field<std::string>(msg, "message"));
  if (type != "eval_response")
    throw ProtocolError("unexpected message type '" + type + "' on trial " + std::to_string(trial_id));
  const auto echoed = field<std::uint64_t>(msg, "trial_id");
  if (echoed != trial_id)
    throw ProtocolError("trial_id mismatch: sent " + std::to_string(trial_id) + ", received " +
                        std::to_string(echoed));
  const auto rows = field<std::size_t>(msg, "rows");
  const auto cols = field<std::size_t>(msg, "cols");
  if (rows != a.rows || cols != b.cols)
    throw ProtocolError("response shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " does not match " + std::to_string(a.rows) + "x" + std::to_string(b.cols));
  return decode_matrix(field<std::string>(msg, "data"), rows, cols);
}

}  // namespace ddt::wire
