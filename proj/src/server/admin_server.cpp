#include "server/admin_server.hpp"

#include <chrono>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace cogsec::server {

namespace {

using nlohmann::json;

int http_status_for(cogsec_status status) {
  switch (status) {
    case COGSEC_OK: return 200;
    case COGSEC_ERR_NOT_FOUND: return 404;
    case COGSEC_ERR_CONFLICT: return 409;
    case COGSEC_ERR_STRUCTURAL:
    case COGSEC_ERR_VALIDATION:
    case COGSEC_ERR_CONFIG:
    case COGSEC_ERR_ARGUMENT: return 400;
    default: return 500;
  }
}

void send(httplib::Response& res, int status, json body) {
  body["schema"] = kApiSchema;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

void send_status(httplib::Response& res, cogsec_status status) {
  send_error(res, http_status_for(status), cogsec_status_name(status), cogsec_last_error());
}

// Takes ownership of a C API string and parses it.
json adopt(char* text) {
  json doc = json::parse(text);
  cogsec_string_free(text);
  return doc;
}

// Parses a request body. An empty body is an empty object; a present
// "schema" must match the API version.
bool parse_body(const httplib::Request& req, httplib::Response& res, json& out) {
  if (req.body.empty()) {
    out = json::object();
    return true;
  }
  out = json::parse(req.body, nullptr, false);
  if (out.is_discarded() || !out.is_object()) {
    send_error(res, 400, "malformed_request", "request body must be a JSON object");
    return false;
  }
  if (out.contains("schema") && out["schema"] != kApiSchema) {
    send_error(res, 400, "unsupported_schema", std::string("expected schema ") + kApiSchema);
    return false;
  }
  return true;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string actor_of(const httplib::Request& req, const json& body) {
  if (body.contains("actor") && body["actor"].is_string() && !body["actor"].get<std::string>().empty()) {
    return body["actor"];
  }
  if (req.has_header("X-Cogsec-Actor")) return req.get_header_value("X-Cogsec-Actor");
  return "admin";
}

}  // namespace

AdminServer::AdminServer(cogsec_csm* csm) : csm_(csm), http_(std::make_unique<httplib::Server>()) {
  register_routes();
}

AdminServer::~AdminServer() = default;

int AdminServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

bool AdminServer::listen_after_bind() { return http_->listen_after_bind(); }

void AdminServer::stop() { http_->stop(); }

void AdminServer::register_routes() {
  auto& http = *http_;
  cogsec_csm* csm = csm_;

  // Runs an admin action and replies with the resulting audit record.
  auto admin = [csm](const char* kind, bool needs_target) {
    return [csm, kind, needs_target](const httplib::Request& req, httplib::Response& res) {
      json body;
      if (!parse_body(req, res, body)) return;
      json action = {{"kind", kind}, {"actor", actor_of(req, body)}, {"issued_at", body.value("issued_at", now_ms())}};
      if (needs_target) action["target"] = req.matches[1].str();
      if (body.contains("theta")) action["theta"] = body["theta"];
      char* out = nullptr;
      const auto st = cogsec_csm_admin(csm, action.dump().c_str(), &out);
      if (st != COGSEC_OK) return send_status(res, st);
      send(res, 200, {{"audit_record", adopt(out)}});
    };
  };

  // Read-only listing through a C API getter.
  auto listing = [csm](cogsec_status (*getter)(cogsec_csm*, char**), const char* key) {
    return [csm, getter, key](const httplib::Request&, httplib::Response& res) {
      char* out = nullptr;
      const auto st = getter(csm, &out);
      if (st != COGSEC_OK) return send_status(res, st);
      send(res, 200, {{key, adopt(out)}});
    };
  };

  http.Get("/api/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, 200, {{"status", "ok"}, {"version", cogsec_version()}});
  });

  http.Get("/api/v1/pending", listing(cogsec_csm_pending, "pending"));
  http.Post(R"(/api/v1/pending/([^/]+)/approve)", admin("approve_new", true));
  http.Post(R"(/api/v1/pending/([^/]+)/deny)", admin("deny_new", true));

  http.Get("/api/v1/theta", [csm](const httplib::Request&, httplib::Response& res) {
    double theta = 0.0;
    const auto st = cogsec_csm_theta(csm, &theta);
    if (st != COGSEC_OK) return send_status(res, st);
    send(res, 200, {{"theta", theta}});
  });
  http.Put("/api/v1/theta", [admin](const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!parse_body(req, res, body)) return;
    if (!body.contains("theta") || !body["theta"].is_number()) {
      return send_error(res, 400, "malformed_request", "body must carry a numeric \"theta\"");
    }
    admin("set_theta", false)(req, res);
  });

  http.Get("/api/v1/nodes", listing(cogsec_csm_nodes, "nodes"));
  http.Get(R"(/api/v1/nodes/([^/]+))", [csm](const httplib::Request& req, httplib::Response& res) {
    char* out = nullptr;
    const auto st = cogsec_csm_node(csm, req.matches[1].str().c_str(), &out);
    if (st != COGSEC_OK) return send_status(res, st);
    send(res, 200, {{"node", adopt(out)}});
  });
  http.Post(R"(/api/v1/nodes/([^/]+)/revoke)", admin("override_revoke", true));
  http.Post(R"(/api/v1/nodes/([^/]+)/readmit)", admin("readmit_node", true));
  http.Post(R"(/api/v1/nodes/([^/]+)/recalibrate)", admin("recalibrate", true));

  http.Get("/api/v1/audit", [csm](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t since = 0;
    if (req.has_param("since")) {
      const std::string text = req.get_param_value("since");
      char* end = nullptr;
      since = std::strtoull(text.c_str(), &end, 10);
      if (text.empty() || *end != '\0' || text[0] == '-') {
        return send_error(res, 400, "malformed_request", "since must be a non-negative integer");
      }
    }
    char* out = nullptr;
    const auto st = cogsec_csm_audit(csm, since, &out);
    if (st != COGSEC_OK) return send_status(res, st);
    json records = adopt(out);
    const std::uint64_t last = records.empty() ? since : records.back()["seq"].get<std::uint64_t>();
    send(res, 200, {{"records", records}, {"last_seq", last}});
  });

  http.Post("/api/v1/events", [csm](const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!parse_body(req, res, body)) return;
    const json& event = body.contains("event") ? body["event"] : body;
    char* out = nullptr;
    const auto st = cogsec_csm_handle_event(csm, event.dump().c_str(), &out);
    if (st != COGSEC_OK) return send_status(res, st);
    send(res, 200, {{"outcome", adopt(out)}});
  });

  http.Get("/api/v1/snapshot", [csm](const httplib::Request&, httplib::Response& res) {
    char* out = nullptr;
    const auto st = cogsec_csm_snapshot(csm, &out);
    if (st != COGSEC_OK) return send_status(res, st);
    send(res, 200, {{"snapshot", adopt(out)}});
  });

  http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    send_error(res, res.status, res.status == 404 ? "no_route" : "http_error", "request could not be served");
  });
  http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "unexpected failure";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send_error(res, 500, "internal", message);
  });
}

}  // namespace cogsec::server
