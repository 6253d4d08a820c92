#pragma once

#include <memory>
#include <string>

#include "karmats/service.hpp"

namespace karmats {

/// HTTP front end for a Service. Routes mirror the Service handler names.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port` (port 0 picks a free port) and serves on a background
  /// thread. Returns the bound port; throws std::runtime_error on failure.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop() is called from elsewhere.
  void listen(const std::string& host, int port);
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Port from KARMATS_PORT, falling back to `fallback`.
int port_from_env(int fallback = 8080);

}  // namespace karmats
