#include "sie/hil/server.hpp"

#include "httplib.h"
#include "sie/common/error.hpp"

namespace sie::hil {

using nlohmann::json;

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::session_not_found:
    case Errc::unknown_run:
    case Errc::not_found: return 404;
    case Errc::session_closed:
    case Errc::session_open:
    case Errc::session_exists:
    case Errc::wrong_state: return 409;
    case Errc::unknown_item:
    case Errc::unknown_field_path:
    case Errc::invalid_argument:
    case Errc::precondition:
    case Errc::schema_violation: return 422;
    case Errc::syntax: return 400;
    default: return 500;
  }
}

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                 const std::string& subject) {
  reply_json(res, status,
             {{"error", {{"code", std::string(code)}, {"message", message}, {"subject", subject}}}});
}

json parse_body(const httplib::Request& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) fail(Errc::syntax, "request body is not JSON");
  return j;
}

}  // namespace

ReviewServer::ReviewServer(ReviewService& service, std::string token)
    : service_(service), token_(std::move(token)), server_(std::make_unique<httplib::Server>()) {
  auto guarded = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      if (!token_.empty() && req.get_header_value("Authorization") != "Bearer " + token_) {
        reply_error(res, 401, "Unauthorized", "missing or wrong bearer token", "");
        return;
      }
      try {
        service_.expire_due();
        handler(req, res);
      } catch (const Error& e) {
        reply_error(res, http_status(e.code()), to_string(e.code()), e.what(), e.subject());
      } catch (const std::exception& e) {
        reply_error(res, 500, "Internal", e.what(), "");
      }
    };
  };

  server_->Get("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::optional<SessionStatus> status;
    if (req.has_param("status")) {
      const auto v = req.get_param_value("status");
      status = parse_session_status(v);
      if (!status) fail(Errc::invalid_argument, "unknown status " + v, v);
    }
    json out = json::array();
    for (const auto& s : service_.sessions(status)) out.push_back(to_json(s));
    reply_json(res, 200, {{"sessions", out}});
  }));
  server_->Get(R"(/sessions/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 reply_json(res, 200, to_json(service_.session(req.matches[1])));
               }));
  server_->Post(R"(/sessions/([^/]+)/decisions)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  if (!body.is_object() || !body.contains("decisions") || !body["decisions"].is_array())
                    fail(Errc::invalid_argument, "body must hold a decisions array", "decisions");
                  std::vector<Decision> ds;
                  for (const auto& d : body["decisions"]) ds.push_back(decision_from_json(d));
                  reply_json(res, 200, to_json(service_.record_decisions(req.matches[1], ds)));
                }));
  server_->Post(R"(/sessions/([^/]+)/submit)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto request = submit_request_from_json(parse_body(req));
                  const auto result = service_.submit(req.matches[1], request);
                  json out = {{"session", to_json(service_.session(req.matches[1]))},
                              {"feedback", agents::to_json(result.feedback)},
                              {"run_state", std::string(pipeline::to_string(result.run_state))},
                              {"next_session_id", result.next_session_id
                                                      ? json(*result.next_session_id)
                                                      : json(nullptr)}};
                  reply_json(res, 200, out);
                }));
  server_->Get(R"(/sessions/([^/]+)/export)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 res.status = 200;
                 res.set_content(service_.export_review_file(req.matches[1]), "text/csv");
               }));
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

void ReviewServer::serve() { server_->listen_after_bind(); }

void ReviewServer::stop() {
  if (server_) server_->stop();
}

bool ReviewServer::running() const { return server_->is_running(); }

}  // namespace sie::hil
