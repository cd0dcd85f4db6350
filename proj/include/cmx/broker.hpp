#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "cmx/errors.hpp"
#include "cmx/transport.hpp"

namespace cmx::broker {

struct ServiceRecord {
  std::string service_name;
  std::string endpoint_url;
  std::string wsdl_url;
  std::int64_t registered_at_ms = 0;  // wall clock, set by the registry

  bool operator==(const ServiceRecord&) const = default;
};

/// In-memory service registry. All operations are atomic with respect to
/// each other; duplicate names are last-writer-wins.
class Registry {
 public:
  /// Throws CmxError(validation) for malformed records. Stamps
  /// registered_at_ms.
  void publish(ServiceRecord record);

  /// Throws CmxError(not_found) for unknown names.
  ServiceRecord lookup(const std::string& service_name) const;

  /// All current records, sorted by service_name.
  std::vector<ServiceRecord> list() const;

  /// Throws CmxError(not_found) when the name is absent.
  void unregister(const std::string& service_name);

  std::size_t size() const;

  // Snapshot persistence: one record per line, tab-separated key=value
  // fields. Loading an absent file leaves the registry empty.
  void save_snapshot(const std::string& path) const;
  void load_snapshot(const std::string& path);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ServiceRecord> records_;
};

/// Registry behind the HTTP API:
///   PUT    /services/{name}   body "endpoint_url=...\nwsdl_url=..."
///   GET    /services/{name}   -> key=value body plus registered_at
///   GET    /services          -> records separated by blank lines
///   DELETE /services/{name}
class BrokerServer {
 public:
  explicit BrokerServer(int port, std::string snapshot_path = "");
  ~BrokerServer();

  void start();
  void stop();
  int port() const { return http_.port(); }
  std::string url() const;
  Registry& registry() { return registry_; }

 private:
  Registry registry_;
  transport::HttpServer http_;
  int configured_port_;
  std::string snapshot_path_;
};

/// Client side of the registry API.
class BrokerClient {
 public:
  explicit BrokerClient(std::string broker_url,
                        std::chrono::milliseconds timeout =
                            std::chrono::milliseconds(5000));

  void publish(const ServiceRecord& record);
  ServiceRecord lookup(const std::string& service_name) const;
  std::vector<ServiceRecord> list_services() const;
  void unregister(const std::string& service_name);

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

}  // namespace cmx::broker
