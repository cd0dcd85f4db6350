#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "cmx/errors.hpp"

namespace cmx::transport {

struct CaseInsensitiveLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

/// Header names compare case-insensitively.
using HeaderMap = std::map<std::string, std::string, CaseInsensitiveLess>;

struct HttpRequest {
  std::string method;
  std::string path;
  HeaderMap headers;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "text/plain";
  HeaderMap headers;
  std::string body;
};

using Handler = std::function<HttpResponse(const HttpRequest&)>;

/// HTTP/1.1 server with longest-prefix route dispatch. Handler exceptions
/// become 500 responses: a SOAP Fault body on /ws/ paths, plain text
/// elsewhere. stop() completes in-flight requests before returning.
class HttpServer {
 public:
  HttpServer();
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// method is one of GET, POST, PUT, DELETE. Routes are matched by the
  /// longest registered path prefix. Register before start().
  void add_route(const std::string& method, const std::string& path_prefix,
                 Handler handler);

  /// port 0 binds an ephemeral port; port() reports the actual one.
  /// Throws CmxError(port_in_use) when binding fails.
  void start(int port, const std::string& host = "127.0.0.1");
  void stop();

  int port() const;
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One SOAP round trip: POST with Content-Type "text/xml; charset=utf-8" and
/// a quoted SOAPAction header. Returns the response body on 200 and on 500
/// when the body is XML (the fault path). Throws CmxError with kind timeout,
/// connect_failure or protocol_error (status captured) otherwise.
std::string soap_post(const std::string& endpoint_url,
                      const std::string& envelope_text,
                      const std::string& soap_action,
                      std::chrono::milliseconds timeout);

// Plain HTTP verbs for the registry API and metrics scraping. These throw
// only transport-level errors; callers interpret the status.
struct SimpleResponse {
  int status = 0;
  std::string body;
};

SimpleResponse http_get(const std::string& url,
                        std::chrono::milliseconds timeout);
SimpleResponse http_put(const std::string& url, const std::string& body,
                        std::chrono::milliseconds timeout);
SimpleResponse http_delete(const std::string& url,
                           std::chrono::milliseconds timeout);

struct UrlParts {
  std::string host;
  int port = 80;
  std::string path = "/";  // includes the query string if any
};

/// Splits an absolute http:// URL. Throws CmxError(validation) for anything
/// else.
UrlParts parse_url(const std::string& url);

}  // namespace cmx::transport
