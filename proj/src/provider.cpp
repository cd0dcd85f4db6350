#include "cmx/provider.hpp"

#include <thread>

#include "cmx/broker.hpp"
#include "cmx/log.hpp"
#include "cmx/xml.hpp"

namespace cmx::provider {

namespace {

// splitmix64: pinned so a spec always reproduces its payload
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

const char* kNoteWords[] = {"alpha", "bravo",  "charlie", "delta",
                            "echo",  "foxtrot", "golf",   "hotel"};
const char* kStatuses[] = {"pending", "shipped", "billed", "closed"};

}  // namespace

CompressMode compress_mode_from_string(const std::string& s) {
  if (s == "always") return CompressMode::always;
  if (s == "never") return CompressMode::never;
  if (s == "auto") return CompressMode::auto_threshold;
  throw CmxError(ErrorKind::config_error,
                 "compress mode must be always, never or auto, got: " + s);
}

std::string to_string(CompressMode mode) {
  switch (mode) {
    case CompressMode::always: return "always";
    case CompressMode::never: return "never";
    case CompressMode::auto_threshold: return "auto";
  }
  return "auto";
}

envelope::MessagePayload generate_message(const GeneratorSpec& spec) {
  if (spec.template_id != "order")
    throw CmxError(ErrorKind::unknown_template,
                   "no payload template named " + spec.template_id);
  SeededStream rng(spec.seed);

  // Small per-payload pools keep the record text repetitive enough for the
  // sliding window to bite.
  std::string sku_pool[12];
  for (auto& sku : sku_pool) {
    sku = "SKU-";
    for (int i = 0; i < 4; ++i)
      sku += static_cast<char>('0' + rng.below(10));
    sku += '-';
    sku += static_cast<char>('A' + rng.below(4));
    sku += static_cast<char>('A' + rng.below(4));
  }

  std::string out = "<records>";
  for (std::uint64_t i = 0; i < spec.record_count; ++i) {
    out += "<record id=\"" + std::to_string(i + 1) + "\">";
    out += "<sku>" + sku_pool[rng.below(12)] + "</sku>";
    out += "<qty>" + std::to_string(1 + rng.below(9)) + "</qty>";
    out += "<warehouse>EU-CENTRAL-1</warehouse>";
    out += "<status>";
    out += kStatuses[rng.below(4)];
    out += "</status>";
    out += "<note>";
    for (int w = 0; w < 3; ++w) {
      if (w > 0) out += ' ';
      out += kNoteWords[rng.below(8)];
    }
    out += "</note></record>";
  }
  out += "</records>";
  return envelope::MessagePayload{to_bytes(out), "text/xml"};
}

bool should_compress(const envelope::MessagePayload& payload,
                     const ProviderConfig& config) {
  switch (config.compress_mode) {
    case CompressMode::always: return true;
    case CompressMode::never: return false;
    case CompressMode::auto_threshold:
      return payload.bytes.size() >= config.compress_threshold;
  }
  return false;
}

envelope::SoapEnvelope normal_msg_handler(
    const envelope::MessagePayload& payload) {
  const std::string_view text(
      reinterpret_cast<const char*>(payload.bytes.data()),
      payload.bytes.size());
  if (!xml::is_xml_text(text))
    throw CmxError(ErrorKind::unrepresentable_payload,
                   "payload bytes cannot travel as plain XML text");
  return envelope::plain_envelope(payload, "");
}

envelope::SoapEnvelope compress_msg_handler(
    const envelope::MessagePayload& payload,
    const codec::CodecParams& params) {
  Bytes block =
      codec::serialize_tokens(codec::compress(payload.bytes, params));
  return envelope::compressed_envelope(std::move(block), payload.bytes.size(),
                                       "");
}

DispatchOutcome controller_dispatch(const envelope::SoapRequest& request,
                                    const ProviderConfig& config) {
  DispatchOutcome out;
  if (request.operation != "getMessage") {
    out.envelope = envelope::fault_envelope(
        "Client", "unsupported operation " + request.operation);
    return out;
  }
  try {
    const TimerStamp gen_start = timer_stamp("generate");
    envelope::MessagePayload payload = generate_message(config.payload_spec);
    const TimerStamp gen_end = timer_stamp("generate");
    out.t_generate_us = micros_between(gen_start, gen_end);
    out.payload_bytes = payload.bytes.size();

    if (should_compress(payload, config)) {
      const TimerStamp comp_start = timer_stamp("compress");
      out.envelope = compress_msg_handler(payload, config.codec_params);
      const TimerStamp comp_end = timer_stamp("compress");
      out.t_compress_us = micros_between(comp_start, comp_end);
      out.compress_ran = true;
    } else {
      out.envelope = normal_msg_handler(payload);
    }
    out.envelope.operation = request.operation;
  } catch (const std::exception& e) {
    out.envelope = envelope::fault_envelope("Server", e.what());
  }
  return out;
}

std::string metrics_csv_header() {
  return "transaction_id,mode,t_generate_us,t_compress_us,t_publish_send_us,"
         "payload_bytes,wire_bytes";
}

std::string metrics_csv(const std::vector<ProviderMetricsRow>& rows) {
  std::string out = metrics_csv_header() + "\n";
  for (const ProviderMetricsRow& r : rows) {
    out += std::to_string(r.transaction_id) + "," + r.mode + "," +
           std::to_string(r.t_generate_us) + "," +
           std::to_string(r.t_compress_us) + "," +
           std::to_string(r.t_publish_send_us) + "," +
           std::to_string(r.payload_bytes) + "," +
           std::to_string(r.wire_bytes) + "\n";
  }
  return out;
}

ServedResponse serve_soap_request(const std::string& raw_request,
                                  const ProviderConfig& config) {
  envelope::SoapRequest request;
  try {
    request = envelope::parse_request(raw_request);
  } catch (const CmxError& e) {
    return {envelope::build_envelope(
                envelope::fault_envelope("Client", e.what())),
            500, std::nullopt};
  }

  const DispatchOutcome outcome = controller_dispatch(request, config);
  if (outcome.envelope.fault.has_value())
    return {envelope::build_envelope(outcome.envelope), 500, std::nullopt};

  const TimerStamp send_start = timer_stamp("publish_send");
  std::string body = envelope::build_envelope(outcome.envelope);
  const TimerStamp send_end = timer_stamp("publish_send");

  ProviderMetricsRow row;
  row.transaction_id = request.transaction_id;
  row.mode = outcome.compress_ran ? "compressed" : "plain";
  row.t_generate_us = outcome.t_generate_us;
  row.t_compress_us = outcome.t_compress_us;
  row.t_publish_send_us = micros_between(send_start, send_end);
  row.payload_bytes = outcome.payload_bytes;
  row.wire_bytes = body.size();
  return {std::move(body), 200, row};
}

void publish_service(const ProviderConfig& config,
                     const std::string& endpoint_url,
                     const std::string& wsdl_url) {
  broker::ServiceRecord record{config.service_name, endpoint_url, wsdl_url, 0};
  broker::BrokerClient client(config.broker_url);
  auto delay = std::chrono::milliseconds(200);
  for (int attempt = 1;; ++attempt) {
    try {
      client.publish(record);
      log::info("registered " + config.service_name + " at " + endpoint_url);
      return;
    } catch (const CmxError& e) {
      if (e.kind() == ErrorKind::validation) throw;
      if (attempt == 3)
        throw CmxError(ErrorKind::broker_unavailable,
                       "giving up after 3 attempts: " + std::string(e.what()));
      log::info("broker registration attempt " + std::to_string(attempt) +
                " failed, retrying");
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

ProviderService::ProviderService(ProviderConfig config)
    : config_(std::move(config)) {
  config_.codec_params.validate();
  const std::string ws_path = "/ws/" + config_.service_name;

  http_.add_route("POST", ws_path, [this](const transport::HttpRequest& req) {
    ServedResponse served = serve_soap_request(req.body, config_);
    if (served.row.has_value()) {
      std::lock_guard<std::mutex> lock(metrics_mutex_);
      metrics_.push_back(*served.row);
    }
    return transport::HttpResponse{served.status, "text/xml; charset=utf-8",
                                   {}, std::move(served.body)};
  });

  http_.add_route("GET", ws_path, [this](const transport::HttpRequest& req) {
    if (req.query.count("wsdl"))
      return transport::HttpResponse{200, "text/xml; charset=utf-8", {},
                                     wsdl_};
    return transport::HttpResponse{404, "text/plain", {},
                                   "append ?wsdl for the service description"};
  });

  http_.add_route("GET", "/metrics", [this](const transport::HttpRequest&) {
    std::lock_guard<std::mutex> lock(metrics_mutex_);
    return transport::HttpResponse{200, "text/csv", {}, metrics_csv(metrics_)};
  });
}

ProviderService::~ProviderService() {
  try {
    stop();
  } catch (...) {
  }
}

void ProviderService::start() {
  http_.start(config_.listen_port);
  wsdl_ = envelope::generate_wsdl(
      {config_.service_name, endpoint_url(), {"getMessage"}});
  try {
    publish_service(config_, endpoint_url(), wsdl_url());
  } catch (...) {
    http_.stop();
    throw;
  }
  log::info("provider " + config_.service_name + " serving on " +
            endpoint_url() + " (mode " + to_string(config_.compress_mode) +
            ")");
}

void ProviderService::stop() { http_.stop(); }

std::string ProviderService::endpoint_url() const {
  return "http://" + config_.advertised_host + ":" +
         std::to_string(http_.port()) + "/ws/" + config_.service_name;
}

std::string ProviderService::wsdl_url() const {
  return endpoint_url() + "?wsdl";
}

std::vector<ProviderMetricsRow> ProviderService::metrics() const {
  std::lock_guard<std::mutex> lock(metrics_mutex_);
  return metrics_;
}

}  // namespace cmx::provider
