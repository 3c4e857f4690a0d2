#pragma once

#include "tutorweb/sync_service.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace tutorweb {

class PortInUse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// HTTP + JSON front end for SyncService:
///
///   GET  /api/catalog
///   POST /api/lecture/{lectureId}/allocation
///   POST /api/answers
///   GET  /api/class/{classId}/progress
///   GET  /api/export/answers?lecture=...&student=...
///   POST /api/admin/users
///
/// Callers authenticate with `Authorization: Bearer <token>`; the catalog is
/// public.
class HttpServer {
 public:
  explicit HttpServer(SyncService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without SO_REUSEPORT so a second server on the same port fails.
  /// Port 0 picks a free port. Returns the bound port; throws PortInUse.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tutorweb
