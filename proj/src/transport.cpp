#include "cmx/transport.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>
#include <vector>

#include <httplib.h>

#include "cmx/envelope.hpp"
#include "cmx/log.hpp"

namespace cmx::transport {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool looks_like_xml(const std::string& body) {
  for (char c : body) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    return c == '<';
  }
  return false;
}

[[noreturn]] void throw_client_error(httplib::Error err,
                                     const std::string& where) {
  const std::string detail = where + ": " + httplib::to_string(err);
  switch (err) {
    case httplib::Error::Connection:
    case httplib::Error::BindIPAddress:
    case httplib::Error::ProxyConnection:
      throw CmxError(ErrorKind::connect_failure, detail);
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::Read:
    case httplib::Error::Write:
      throw CmxError(ErrorKind::timeout, detail);
    default:
      throw CmxError(ErrorKind::protocol_error, detail);
  }
}

httplib::Client make_client(const UrlParts& parts,
                            std::chrono::milliseconds timeout) {
  httplib::Client cli(parts.host, parts.port);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  return cli;
}

}  // namespace

bool CaseInsensitiveLess::operator()(const std::string& a,
                                     const std::string& b) const {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) <
               std::tolower(static_cast<unsigned char>(y));
      });
}

UrlParts parse_url(const std::string& url) {
  const std::string_view prefix = "http://";
  if (url.rfind(prefix, 0) != 0)
    throw CmxError(ErrorKind::validation,
                   "expected an absolute http:// URL, got: " + url);
  UrlParts parts;
  const std::size_t host_start = prefix.size();
  const std::size_t path_start = url.find('/', host_start);
  const std::string authority =
      url.substr(host_start, path_start == std::string::npos
                                 ? std::string::npos
                                 : path_start - host_start);
  if (path_start != std::string::npos) parts.path = url.substr(path_start);
  const std::size_t colon = authority.rfind(':');
  if (colon == std::string::npos) {
    parts.host = authority;
  } else {
    parts.host = authority.substr(0, colon);
    try {
      parts.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw CmxError(ErrorKind::validation, "bad port in URL: " + url);
    }
  }
  if (parts.host.empty())
    throw CmxError(ErrorKind::validation, "empty host in URL: " + url);
  return parts;
}

struct HttpServer::Impl {
  struct Route {
    std::string method;
    std::string prefix;
    Handler handler;
  };

  httplib::Server server;
  std::thread thread;
  std::vector<Route> routes;
  std::atomic<int> bound_port{0};
  std::atomic<bool> running{false};

  void dispatch(const httplib::Request& req, httplib::Response& res) {
    const Route* best = nullptr;
    for (const Route& r : routes) {
      if (r.method != req.method) continue;
      if (req.path.rfind(r.prefix, 0) != 0) continue;
      if (best == nullptr || r.prefix.size() > best->prefix.size()) best = &r;
    }
    if (best == nullptr) {
      res.status = 404;
      res.set_content("no route for " + req.method + " " + req.path,
                      "text/plain");
      return;
    }

    HttpRequest in;
    in.method = req.method;
    in.path = req.path;
    in.body = req.body;
    for (const auto& [k, v] : req.headers) in.headers[k] = v;
    for (const auto& [k, v] : req.params) in.query[k] = v;

    try {
      HttpResponse out = best->handler(in);
      res.status = out.status;
      for (const auto& [k, v] : out.headers) res.set_header(k, v);
      res.set_content(out.body, out.content_type);
    } catch (const std::exception& e) {
      log::debug(std::string("handler error on ") + req.path + ": " +
                 e.what());
      res.status = 500;
      if (req.path.rfind("/ws/", 0) == 0) {
        res.set_content(
            envelope::build_envelope(envelope::fault_envelope("Server",
                                                              e.what())),
            "text/xml; charset=utf-8");
      } else {
        res.set_content(e.what(), "text/plain");
      }
    }
  }
};

HttpServer::HttpServer() : impl_(std::make_unique<Impl>()) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::add_route(const std::string& method,
                           const std::string& path_prefix, Handler handler) {
  if (method != "GET" && method != "POST" && method != "PUT" &&
      method != "DELETE")
    throw CmxError(ErrorKind::validation, "unsupported method " + method);
  impl_->routes.push_back({method, path_prefix, std::move(handler)});
}

void HttpServer::start(int port, const std::string& host) {
  auto* impl = impl_.get();
  // SO_REUSEADDR for fast restarts, but no SO_REUSEPORT: a second bind to a
  // live port must fail so startup reports port-in-use.
  impl->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
               reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  const auto route = [impl](const httplib::Request& req,
                            httplib::Response& res) {
    impl->dispatch(req, res);
  };
  impl->server.Get(".*", route);
  impl->server.Post(".*", route);
  impl->server.Put(".*", route);
  impl->server.Delete(".*", route);

  if (port == 0) {
    const int bound = impl->server.bind_to_any_port(host);
    if (bound < 0)
      throw CmxError(ErrorKind::port_in_use, "cannot bind an ephemeral port");
    impl->bound_port = bound;
  } else {
    if (!impl->server.bind_to_port(host, port))
      throw CmxError(ErrorKind::port_in_use,
                     host + ":" + std::to_string(port) + " is unavailable");
    impl->bound_port = port;
  }
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
  impl->running = true;
  log::debug("server listening on " + host + ":" +
             std::to_string(impl->bound_port.load()));
}

void HttpServer::stop() {
  if (!impl_->running.exchange(false)) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const { return impl_->bound_port.load(); }

bool HttpServer::running() const { return impl_->running.load(); }

std::string soap_post(const std::string& endpoint_url,
                      const std::string& envelope_text,
                      const std::string& soap_action,
                      std::chrono::milliseconds timeout) {
  if (envelope_text.empty())
    throw CmxError(ErrorKind::validation, "refusing to POST an empty body");
  const UrlParts parts = parse_url(endpoint_url);
  httplib::Client cli = make_client(parts, timeout);
  const httplib::Headers headers = {{"SOAPAction", "\"" + soap_action + "\""}};
  auto res = cli.Post(parts.path, headers, envelope_text,
                      "text/xml; charset=utf-8");
  if (!res) throw_client_error(res.error(), "POST " + endpoint_url);
  if (res->status == 200) return res->body;
  if (res->status == 500 && looks_like_xml(res->body)) return res->body;
  throw CmxError(ErrorKind::protocol_error,
                 "POST " + endpoint_url + " returned HTTP " +
                     std::to_string(res->status),
                 res->status);
}

SimpleResponse http_get(const std::string& url,
                        std::chrono::milliseconds timeout) {
  const UrlParts parts = parse_url(url);
  httplib::Client cli = make_client(parts, timeout);
  auto res = cli.Get(parts.path);
  if (!res) throw_client_error(res.error(), "GET " + url);
  return {res->status, res->body};
}

SimpleResponse http_put(const std::string& url, const std::string& body,
                        std::chrono::milliseconds timeout) {
  const UrlParts parts = parse_url(url);
  httplib::Client cli = make_client(parts, timeout);
  auto res = cli.Put(parts.path, body, "text/plain; charset=utf-8");
  if (!res) throw_client_error(res.error(), "PUT " + url);
  return {res->status, res->body};
}

SimpleResponse http_delete(const std::string& url,
                           std::chrono::milliseconds timeout) {
  const UrlParts parts = parse_url(url);
  httplib::Client cli = make_client(parts, timeout);
  auto res = cli.Delete(parts.path);
  if (!res) throw_client_error(res.error(), "DELETE " + url);
  return {res->status, res->body};
}

}  // namespace cmx::transport
