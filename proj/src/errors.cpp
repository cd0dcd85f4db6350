#include "cmx/errors.hpp"

namespace cmx {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::capacity_overflow: return "capacity-overflow";
    case ErrorKind::bad_magic: return "bad-magic";
    case ErrorKind::truncated_stream: return "truncated-stream";
    case ErrorKind::token_invariant: return "token-invariant";
    case ErrorKind::malformed_stream: return "malformed-stream";
    case ErrorKind::not_xml: return "not-xml";
    case ErrorKind::missing_envelope: return "missing-envelope-elements";
    case ErrorKind::unknown_body_element: return "unknown-body-element";
    case ErrorKind::base64_invalid: return "base64-decode-failure";
    case ErrorKind::unrepresentable_payload: return "unrepresentable-payload";
    case ErrorKind::size_mismatch: return "size-mismatch";
    case ErrorKind::fault_received: return "fault-received";
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::connect_failure: return "connect-failure";
    case ErrorKind::protocol_error: return "protocol-error";
    case ErrorKind::port_in_use: return "port-in-use";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::validation: return "validation";
    case ErrorKind::unknown_template: return "unknown-template";
    case ErrorKind::unknown_operation: return "unknown-operation";
    case ErrorKind::broker_unavailable: return "broker-unavailable";
    case ErrorKind::config_error: return "config-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace cmx
