#include "tutorweb/http_server.hpp"

#include "httplib.h"

#include <spdlog/spdlog.h>

#include <chrono>
#include <sys/socket.h>

namespace tutorweb {

namespace {

int http_status(ServiceError::Code code) {
  switch (code) {
    case ServiceError::Code::BadRequest:
      return 400;
    case ServiceError::Code::Unauthorized:
      return 401;
    case ServiceError::Code::Forbidden:
      return 403;
    case ServiceError::Code::UnknownLecture:
      return 404;
    case ServiceError::Code::UnknownToken:
      return 409;
    case ServiceError::Code::EmptyLecture:
      return 422;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

struct HttpServer::Impl {
  SyncService& service;
  httplib::Server server;

  explicit Impl(SyncService& s) : service(s) { routes(); }

  Principal require_principal(const httplib::Request& req) const {
    const auto header = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (header.rfind(prefix, 0) == 0) {
      if (auto p = service.authenticate(header.substr(prefix.size()))) return *p;
    }
    throw ServiceError(ServiceError::Code::Unauthorized, "missing or invalid bearer token");
  }

  // Wraps a handler with uniform error mapping.
  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const ServiceError& e) {
        send_error(res, http_status(e.code()), e.name(), e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
      } catch (const std::exception& e) {
        spdlog::error("{} {}: {}", req.method, req.path, e.what());
        send_error(res, 500, "Internal", "internal error");
      }
    };
  }

  void routes() {
    server.Get("/api/catalog", guarded([this](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, service.catalog());
               }));

    server.Post(R"(/api/lecture/([^/]+)/allocation)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto who = require_principal(req);
                  send_json(res, 200, service.get_allocation(who, req.matches[1]));
                }));

    server.Post("/api/answers", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto who = require_principal(req);
                  const auto batch = batch_from_json(nlohmann::json::parse(req.body));
                  const auto ack = service.ingest_batch(who, batch, now_ms());
                  spdlog::debug("ingested {} records for {}/{}", batch.records.size(), batch.student_id,
                                batch.lecture_id);
                  send_json(res, 200, ack_to_json(ack));
                }));

    server.Get(R"(/api/class/([^/]+)/progress)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto who = require_principal(req);
                 nlohmann::json rows = nlohmann::json::array();
                 for (const auto& r : service.class_progress(who, req.matches[1])) {
                   rows.push_back({{"student", r.student},
                                   {"lecture", r.lecture},
                                   {"answered", r.answered},
                                   {"grade", r.grade},
                                   {"lastActivity", r.last_activity ? nlohmann::json(*r.last_activity)
                                                                    : nlohmann::json(nullptr)}});
                 }
                 send_json(res, 200, {{"rows", rows}});
               }));

    server.Get("/api/export/answers", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto who = require_principal(req);
                 std::string body;
                 for (const auto& r : service.export_answers(who, req.get_param_value("lecture"),
                                                            req.get_param_value("student"))) {
                   body += nlohmann::json(r).dump();
                   body += '\n';
                 }
                 res.status = 200;
                 res.set_content(body, "application/x-ndjson; charset=utf-8");
               }));

    server.Post("/api/admin/users", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto who = require_principal(req);
                  const auto j = nlohmann::json::parse(req.body);
                  std::vector<std::pair<std::string, ClassRole>> classes;
                  for (const auto& c : j.value("classes", nlohmann::json::array())) {
                    const auto role = c.value("role", std::string("student"));
                    if (role != "student" && role != "tutor") {
                      throw ServiceError(ServiceError::Code::BadRequest, "role must be student or tutor");
                    }
                    classes.emplace_back(c.at("class").get<std::string>(),
                                         role == "tutor" ? ClassRole::Tutor : ClassRole::Student);
                  }
                  const auto id = j.at("id").get<std::string>();
                  const auto token = service.create_user(who, id, j.value("admin", false), classes);
                  send_json(res, 200, {{"id", id}, {"token", token}});
                }));
  }
};

HttpServer::HttpServer(SyncService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw PortInUse("could not bind any port on " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw PortInUse("port " + std::to_string(port) + " is already in use");
  }
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }
void HttpServer::stop() { impl_->server.stop(); }
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace tutorweb
