#pragma once

// Read-only HTTP front end over a Dataset and an optional particle store.
// Routing is separated from the socket layer so requests can be served
// in-process (see Service::handle).

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "regsum/error.hpp"
#include "regsum/query.hpp"
#include "regsum/store.hpp"

namespace regsum {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  /// Set for attachments.
  std::string filename;
};

class Service {
 public:
  /// Throws Incompatible when the particle store's region counts differ from
  /// the PDF store's grid.
  Service(std::shared_ptr<const Dataset> dataset, std::shared_ptr<const ParticleStoreReader> particles = nullptr);

  /// Never throws; errors become 400/404/422 responses with a JSON body
  /// {"error": code, "message": text}.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::multimap<std::string, std::string>& params, const std::string& body) const;

  const Dataset& dataset() const noexcept { return *dataset_; }

 private:
  HttpResponse route(const std::string& method, const std::string& path,
                     const std::multimap<std::string, std::string>& params, const std::string& body) const;

  std::shared_ptr<const Dataset> dataset_;
  std::shared_ptr<const ParticleStoreReader> particles_;
};

/// HTTP status for an engine error code.
int http_status(ErrorCode code) noexcept;

/// Socket listener dispatching every request to a Service.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const Service> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and returns the port (an ephemeral one when port is 0). Throws IoError.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace regsum
