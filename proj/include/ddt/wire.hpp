#pragma once

// Line-delimited protocol for implementations hosted in a child process.
// Normative description: docs/protocol.md.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "ddt/harness.hpp"
#include "ddt/matrix.hpp"

namespace ddt::wire {

inline constexpr std::string_view kProtocolVersion = "1";

/// 16 lowercase hex digits of the IEEE-754 bit pattern.
std::string encode_double(double x);
/// Accepts upper or lower case hex; rejects NaN patterns.
double decode_double(std::string_view hex);

/// Row-major, space-separated bit patterns. Throws ProtocolError on NaN.
std::string encode_matrix(const Matrix& m);
Matrix decode_matrix(std::string_view payload, std::size_t rows, std::size_t cols);

std::string make_hello(std::string_view impl_label);
std::string make_eval_request(std::uint64_t trial_id, const Matrix& a, const Matrix& b);
std::string make_eval_response(std::uint64_t trial_id, const Matrix& result);
std::string make_error(std::uint64_t trial_id, std::string_view message);
std::string make_shutdown();

/// Harness-side client. Owns one child process; requests are strictly
/// sequential, so an instance must not be shared between threads.
class ExternalImplementation {
 public:
  /// Launches `/bin/sh -c endpoint.command` and waits for the hello
  /// message. Throws ProtocolError on a version mismatch or timeout.
  explicit ExternalImplementation(const ExternalEndpoint& endpoint);
  ~ExternalImplementation();

  ExternalImplementation(const ExternalImplementation&) = delete;
  ExternalImplementation& operator=(const ExternalImplementation&) = delete;

  /// Sends one eval_request and waits for the matching eval_response.
  Matrix evaluate(std::uint64_t trial_id, const Matrix& a, const Matrix& b);

  const std::string& label() const { return label_; }

 private:
  struct Process;
  std::unique_ptr<Process> proc_;
  std::string label_;
  double timeout_s_;
};

}  // namespace ddt::wire
