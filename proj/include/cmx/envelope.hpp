#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmx/bytes.hpp"
#include "cmx/errors.hpp"

namespace cmx::envelope {

inline constexpr std::string_view kSoapNs =
    "http://schemas.xmlsoap.org/soap/envelope/";
inline constexpr std::string_view kCmxNs = "urn:cmx:messaging:1";

struct MessagePayload {
  Bytes bytes;
  std::string content_type = "text/xml";

  bool operator==(const MessagePayload&) const = default;
};

struct SoapFault {
  std::string code;  // "Client" or "Server"
  std::string reason;

  bool operator==(const SoapFault&) const = default;
};

/// Exactly one of payload, compressed_block, fault is present; compressed
/// and original_size track compressed_block.
struct SoapEnvelope {
  bool compressed = false;
  std::optional<MessagePayload> payload;
  std::optional<Bytes> compressed_block;
  std::optional<std::uint64_t> original_size;
  std::string operation;
  std::optional<SoapFault> fault;

  bool operator==(const SoapEnvelope&) const = default;
};

SoapEnvelope plain_envelope(MessagePayload payload, std::string operation);
SoapEnvelope compressed_envelope(Bytes block, std::uint64_t original_size,
                                 std::string operation);
SoapEnvelope fault_envelope(std::string code, std::string reason);

/// Renders the envelope as a deterministic SOAP 1.1 document. Plain payloads
/// must be XML-representable text; arbitrary bytes belong on the compressed
/// path. Throws CmxError(validation) on invariant violations and
/// CmxError(unrepresentable_payload) for non-XML plain bytes.
std::string build_envelope(const SoapEnvelope& env);

/// Inverse of build_envelope on its image. Fault documents come back as
/// fault-carrying envelopes, not errors. Throws CmxError with kind not_xml,
/// missing_envelope, unknown_body_element or base64_invalid.
SoapEnvelope parse_envelope(std::string_view xml_text);

struct ServiceDescriptor {
  std::string service_name;
  std::string endpoint_url;
  std::vector<std::string> operations;
};

/// WSDL 1.1 document for the service: one portType operation per entry, a
/// SOAP binding, and a service port located at endpoint_url. Deterministic.
std::string generate_wsdl(const ServiceDescriptor& desc);

std::string encode_base64(ByteView data);
Bytes decode_base64(std::string_view text);

// Request side of the exchange: a bare operation element in the body plus a
// correlation id header.
struct SoapRequest {
  std::string operation;
  std::uint64_t transaction_id = 0;

  bool operator==(const SoapRequest&) const = default;
};

std::string build_request(const SoapRequest& req);
SoapRequest parse_request(std::string_view xml_text);

}  // namespace cmx::envelope
