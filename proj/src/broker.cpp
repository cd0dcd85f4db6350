#include "cmx/broker.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "cmx/log.hpp"

namespace cmx::broker {

namespace {

bool absolute_url(const std::string& url) {
  return url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0;
}

void validate_record(const ServiceRecord& rec) {
  if (rec.service_name.empty())
    throw CmxError(ErrorKind::validation, "service_name must be non-empty");
  for (char c : rec.service_name)
    if (c == '/' || std::isspace(static_cast<unsigned char>(c)) ||
        std::iscntrl(static_cast<unsigned char>(c)))
      throw CmxError(ErrorKind::validation,
                     "service_name contains reserved characters: " +
                         rec.service_name);
  if (!absolute_url(rec.endpoint_url))
    throw CmxError(ErrorKind::validation,
                   "endpoint_url must be absolute: " + rec.endpoint_url);
  if (!absolute_url(rec.wsdl_url))
    throw CmxError(ErrorKind::validation,
                   "wsdl_url must be absolute: " + rec.wsdl_url);
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::map<std::string, std::string> parse_kv(const std::string& body,
                                            char separator) {
  std::map<std::string, std::string> out;
  std::string line;
  std::istringstream in(body);
  while (std::getline(in, line, separator)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::string record_body(const ServiceRecord& rec, bool with_name) {
  std::string out;
  if (with_name) out += "service_name=" + rec.service_name + "\n";
  out += "endpoint_url=" + rec.endpoint_url + "\n";
  out += "wsdl_url=" + rec.wsdl_url + "\n";
  out += "registered_at=" + std::to_string(rec.registered_at_ms) + "\n";
  return out;
}

ServiceRecord record_from_kv(const std::map<std::string, std::string>& kv,
                             const std::string& name) {
  ServiceRecord rec;
  rec.service_name = name;
  if (auto it = kv.find("service_name"); it != kv.end())
    rec.service_name = it->second;
  if (auto it = kv.find("endpoint_url"); it != kv.end())
    rec.endpoint_url = it->second;
  if (auto it = kv.find("wsdl_url"); it != kv.end()) rec.wsdl_url = it->second;
  if (auto it = kv.find("registered_at"); it != kv.end())
    rec.registered_at_ms = std::stoll(it->second);
  return rec;
}

}  // namespace

void Registry::publish(ServiceRecord record) {
  validate_record(record);
  record.registered_at_ms = now_ms();
  std::lock_guard<std::mutex> lock(mutex_);
  records_[record.service_name] = std::move(record);
}

ServiceRecord Registry::lookup(const std::string& service_name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = records_.find(service_name);
  if (it == records_.end())
    throw CmxError(ErrorKind::not_found,
                   "no service named " + service_name);
  return it->second;
}

std::vector<ServiceRecord> Registry::list() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<ServiceRecord> out;
  out.reserve(records_.size());
  for (const auto& [name, rec] : records_) out.push_back(rec);
  return out;  // std::map iteration is already name-sorted
}

void Registry::unregister(const std::string& service_name) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (records_.erase(service_name) == 0)
    throw CmxError(ErrorKind::not_found,
                   "no service named " + service_name);
}

std::size_t Registry::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return records_.size();
}

void Registry::save_snapshot(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw CmxError(ErrorKind::io_error, "cannot write snapshot " + path);
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& [name, rec] : records_) {
    out << "service_name=" << rec.service_name
        << "\tendpoint_url=" << rec.endpoint_url
        << "\twsdl_url=" << rec.wsdl_url
        << "\tregistered_at=" << rec.registered_at_ms << "\n";
  }
}

void Registry::load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;  // nothing saved yet
  std::lock_guard<std::mutex> lock(mutex_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto kv = parse_kv(line, '\t');
    ServiceRecord rec = record_from_kv(kv, "");
    if (rec.service_name.empty()) continue;
    records_[rec.service_name] = std::move(rec);
  }
}

BrokerServer::BrokerServer(int port, std::string snapshot_path)
    : configured_port_(port), snapshot_path_(std::move(snapshot_path)) {
  if (!snapshot_path_.empty()) registry_.load_snapshot(snapshot_path_);

  http_.add_route("PUT", "/services/", [this](const transport::HttpRequest& req) {
    const std::string name = req.path.substr(std::string("/services/").size());
    const auto kv = parse_kv(req.body, '\n');
    ServiceRecord rec = record_from_kv(kv, name);
    rec.service_name = name;
    try {
      registry_.publish(rec);
    } catch (const CmxError& e) {
      return transport::HttpResponse{400, "text/plain", {}, e.what()};
    }
    return transport::HttpResponse{200, "text/plain", {}, "registered\n"};
  });

  http_.add_route("GET", "/services", [this](const transport::HttpRequest& req) {
    if (req.path == "/services" || req.path == "/services/") {
      std::string body;
      bool first = true;
      for (const ServiceRecord& rec : registry_.list()) {
        if (!first) body += "\n";
        body += record_body(rec, true);
        first = false;
      }
      return transport::HttpResponse{200, "text/plain", {}, body};
    }
    const std::string name = req.path.substr(std::string("/services/").size());
    try {
      const ServiceRecord rec = registry_.lookup(name);
      return transport::HttpResponse{200, "text/plain", {},
                                     record_body(rec, false)};
    } catch (const CmxError&) {
      return transport::HttpResponse{404, "text/plain", {}, "not found\n"};
    }
  });

  http_.add_route("DELETE", "/services/",
                  [this](const transport::HttpRequest& req) {
    const std::string name = req.path.substr(std::string("/services/").size());
    try {
      registry_.unregister(name);
      return transport::HttpResponse{200, "text/plain", {}, "unregistered\n"};
    } catch (const CmxError&) {
      return transport::HttpResponse{404, "text/plain", {}, "not found\n"};
    }
  });
}

BrokerServer::~BrokerServer() {
  try {
    stop();
  } catch (...) {
    // destructor must not throw
  }
}

void BrokerServer::start() {
  http_.start(configured_port_);
  log::info("broker listening on " + url());
}

void BrokerServer::stop() {
  if (!http_.running()) return;
  http_.stop();
  if (!snapshot_path_.empty()) {
    registry_.save_snapshot(snapshot_path_);
    log::info("broker snapshot written to " + snapshot_path_);
  }
}

std::string BrokerServer::url() const {
  return "http://127.0.0.1:" + std::to_string(http_.port());
}

BrokerClient::BrokerClient(std::string broker_url,
                           std::chrono::milliseconds timeout)
    : base_url_(std::move(broker_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

void BrokerClient::publish(const ServiceRecord& record) {
  const std::string body = "endpoint_url=" + record.endpoint_url +
                           "\nwsdl_url=" + record.wsdl_url + "\n";
  const auto res = transport::http_put(
      base_url_ + "/services/" + record.service_name, body, timeout_);
  if (res.status == 400)
    throw CmxError(ErrorKind::validation, "broker rejected record: " + res.body);
  if (res.status != 200)
    throw CmxError(ErrorKind::protocol_error,
                   "publish returned HTTP " + std::to_string(res.status),
                   res.status);
}

ServiceRecord BrokerClient::lookup(const std::string& service_name) const {
  const auto res =
      transport::http_get(base_url_ + "/services/" + service_name, timeout_);
  if (res.status == 404)
    throw CmxError(ErrorKind::not_found, "no service named " + service_name);
  if (res.status != 200)
    throw CmxError(ErrorKind::protocol_error,
                   "lookup returned HTTP " + std::to_string(res.status),
                   res.status);
  return record_from_kv(parse_kv(res.body, '\n'), service_name);
}

std::vector<ServiceRecord> BrokerClient::list_services() const {
  const auto res = transport::http_get(base_url_ + "/services", timeout_);
  if (res.status != 200)
    throw CmxError(ErrorKind::protocol_error,
                   "list returned HTTP " + std::to_string(res.status),
                   res.status);
  std::vector<ServiceRecord> out;
  std::string block;
  std::istringstream in(res.body);
  std::string line;
  const auto flush = [&] {
    if (block.empty()) return;
    ServiceRecord rec = record_from_kv(parse_kv(block, '\n'), "");
    if (!rec.service_name.empty()) out.push_back(std::move(rec));
    block.clear();
  };
  while (std::getline(in, line)) {
    if (line.empty()) {
      flush();
    } else {
      block += line + "\n";
    }
  }
  flush();
  return out;
}

void BrokerClient::unregister(const std::string& service_name) {
  const auto res = transport::http_delete(
      base_url_ + "/services/" + service_name, timeout_);
  if (res.status == 404)
    throw CmxError(ErrorKind::not_found, "no service named " + service_name);
  if (res.status != 200)
    throw CmxError(ErrorKind::protocol_error,
                   "unregister returned HTTP " + std::to_string(res.status),
                   res.status);
}

}  // namespace cmx::broker
