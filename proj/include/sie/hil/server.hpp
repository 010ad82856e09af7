#pragma once

#include <memory>
#include <string>

#include "sie/common/error.hpp"
#include "sie/hil/review_service.hpp"

namespace httplib {
class Server;
}

namespace sie::hil {

/// HTTP front of a ReviewService:
///
///   GET  /sessions?status=open
///   GET  /sessions/{id}
///   POST /sessions/{id}/decisions   {"decisions": [...]}
///   POST /sessions/{id}/submit      {"decisions", "guidance",
///                                    "approve_remainder", "request_another_round"}
///   GET  /sessions/{id}/export      text/csv review file
///
/// Errors answer {"error": {"code", "message", "subject"}}. With a token
/// set, every request must carry "Authorization: Bearer <token>".
class ReviewServer {
 public:
  explicit ReviewServer(ReviewService& service, std::string token = {});
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();
  bool running() const;

 private:
  ReviewService& service_;
  std::string token_;
  std::unique_ptr<httplib::Server> server_;
};

/// HTTP status for an error code.
int http_status(Errc code) noexcept;

}  // namespace sie::hil
