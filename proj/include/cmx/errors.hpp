#pragma once

#include <stdexcept>
#include <string>

namespace cmx {

/// Every failure the library can raise, one kind per distinguishable cause.
enum class ErrorKind {
  // codec
  capacity_overflow,
  bad_magic,
  truncated_stream,
  token_invariant,
  malformed_stream,
  // envelope / xml
  not_xml,
  missing_envelope,
  unknown_body_element,
  base64_invalid,
  unrepresentable_payload,
  // message consumption
  size_mismatch,
  fault_received,
  // transport
  timeout,
  connect_failure,
  protocol_error,
  port_in_use,
  // registry
  not_found,
  validation,
  // provider / harness
  unknown_template,
  unknown_operation,
  broker_unavailable,
  config_error,
  io_error,
};

const char* to_string(ErrorKind kind);

class CmxError : public std::runtime_error {
 public:
  CmxError(ErrorKind kind, const std::string& message, int http_status = 0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        http_status_(http_status) {}

  ErrorKind kind() const { return kind_; }

  /// HTTP status captured for protocol errors, 0 otherwise.
  int http_status() const { return http_status_; }

 private:
  ErrorKind kind_;
  int http_status_;
};

}  // namespace cmx
