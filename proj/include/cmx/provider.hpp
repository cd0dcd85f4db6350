#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cmx/codec.hpp"
#include "cmx/envelope.hpp"
#include "cmx/timing.hpp"
#include "cmx/transport.hpp"

namespace cmx::provider {

enum class CompressMode { always, never, auto_threshold };

CompressMode compress_mode_from_string(const std::string& s);
std::string to_string(CompressMode mode);

/// Identical specs generate byte-identical payloads.
struct GeneratorSpec {
  std::uint64_t record_count = 1;
  std::uint64_t seed = 1;
  std::string template_id = "order";
};

struct ProviderConfig {
  std::string service_name = "MsgService";
  int listen_port = 0;  // 0 binds an ephemeral port
  std::string broker_url;
  CompressMode compress_mode = CompressMode::auto_threshold;
  std::size_t compress_threshold = 512;
  GeneratorSpec payload_spec;
  codec::CodecParams codec_params;
  std::string advertised_host = "127.0.0.1";
};

/// Deterministic repetitive-record XML corpus. Throws
/// CmxError(unknown_template) for template ids other than "order".
envelope::MessagePayload generate_message(const GeneratorSpec& spec);

/// always -> true; never -> false; auto -> payload length >= threshold.
bool should_compress(const envelope::MessagePayload& payload,
                     const ProviderConfig& config);

/// Plain-transaction handler: wraps the payload verbatim. Throws
/// CmxError(unrepresentable_payload) for bytes XML cannot carry.
envelope::SoapEnvelope normal_msg_handler(
    const envelope::MessagePayload& payload);

/// Compressed-transaction handler: tokenizes, serializes and wraps the
/// payload with its original size.
envelope::SoapEnvelope compress_msg_handler(
    const envelope::MessagePayload& payload,
    const codec::CodecParams& params);

struct DispatchOutcome {
  envelope::SoapEnvelope envelope;
  std::uint64_t t_generate_us = 0;
  std::uint64_t t_compress_us = 0;
  bool compress_ran = false;
  std::uint64_t payload_bytes = 0;
};

/// Routes a parsed request to the matching handler and stamps the generate
/// and compress stages. Unsupported operations come back as a Client fault,
/// handler failures as a Server fault; never throws for request-level
/// problems.
DispatchOutcome controller_dispatch(const envelope::SoapRequest& request,
                                    const ProviderConfig& config);

/// One row of the provider-side timing log, keyed by the transaction id the
/// requester sent.
struct ProviderMetricsRow {
  std::uint64_t transaction_id = 0;
  std::string mode;
  std::uint64_t t_generate_us = 0;
  std::uint64_t t_compress_us = 0;
  std::uint64_t t_publish_send_us = 0;
  std::uint64_t payload_bytes = 0;
  std::uint64_t wire_bytes = 0;
};

std::string metrics_csv_header();
std::string metrics_csv(const std::vector<ProviderMetricsRow>& rows);

struct ServedResponse {
  std::string body;
  int status = 200;
  std::optional<ProviderMetricsRow> row;  // absent for fault responses
};

/// Full request handling for one SOAP POST body, HTTP-independent: parse,
/// dispatch, serialize, stamp the send stage.
ServedResponse serve_soap_request(const std::string& raw_request,
                                  const ProviderConfig& config);

/// Registers the service record with the broker, retrying 3 times with a
/// 200 ms doubling backoff. Throws CmxError(broker_unavailable) once the
/// attempts are exhausted.
void publish_service(const ProviderConfig& config,
                     const std::string& endpoint_url,
                     const std::string& wsdl_url);

/// The running provider: SOAP endpoint at POST /ws/{service}, WSDL at
/// GET /ws/{service}?wsdl, timing log at GET /metrics.
class ProviderService {
 public:
  explicit ProviderService(ProviderConfig config);
  ~ProviderService();

  /// Binds the HTTP server, generates the WSDL once, then publishes to the
  /// broker. On registration failure the server is torn down and the error
  /// rethrown.
  void start();
  void stop();

  int port() const { return http_.port(); }
  bool running() const { return http_.running(); }
  std::string endpoint_url() const;
  std::string wsdl_url() const;
  const std::string& wsdl_document() const { return wsdl_; }

  std::vector<ProviderMetricsRow> metrics() const;

 private:
  ProviderConfig config_;
  std::string wsdl_;
  transport::HttpServer http_;
  mutable std::mutex metrics_mutex_;
  std::vector<ProviderMetricsRow> metrics_;
};

}  // namespace cmx::provider
