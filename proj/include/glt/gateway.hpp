#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "glt/error.hpp"
#include "glt/inference.hpp"
#include "glt/privacy_gate.hpp"
#include "glt/qa.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace glt::gateway {

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

Reply json_reply(int status, const nlohmann::ordered_json& body);
Reply error_reply(int status, std::string_view error, std::string_view message);

/// HTTP status for a library error raised while serving a request.
int status_for(ErrorKind kind) noexcept;

/// One JSON line per request on `sink`: method, path, status, sizes and
/// payload digests. Bodies are never logged.
class RequestLog {
 public:
  RequestLog(std::string service, std::ostream* sink) : service_(std::move(service)), sink_(sink) {}
  void record(std::string_view method, std::string_view path, int status, std::string_view request_body,
              std::string_view response_body, std::chrono::milliseconds elapsed);

 private:
  std::string service_;
  std::ostream* sink_;
  std::mutex mu_;
};

/// True when `token` is empty or the header is exactly "Bearer <token>".
bool authorized(std::string_view authorization_header, std::string_view token);

/// Cloud side of the deployment: holds transcripts only and answers
/// questions with the text model. Every inbound transcript (inline or pulled
/// from the edge) and every response passes privacy_gate.
///
///   POST /v1/ask   {transcript_id | transcript, question, options, question_id?} -> prediction
///   GET  /healthz
struct CloudServiceOptions {
  std::string edge_url;    // pull source for transcript_id requests
  std::string edge_token;  // bearer token presented to the edge
  std::string auth_token;  // required from callers when non-empty
  inference::DecodingConfig decoding = inference::DecodingConfig::text_default();
  bool answer_fallback = true;
  std::chrono::milliseconds edge_timeout{30'000};
  std::ostream* log = nullptr;
};

class CloudService {
 public:
  CloudService(CloudServiceOptions options, std::shared_ptr<const inference::TextModel> llm);

  Reply ask(std::string_view body, std::string_view content_type) const;
  Reply healthz() const;

  /// Registers routes (with auth, logging and the outbound privacy gate).
  void mount(httplib::Server& server);

 private:
  std::string fetch_transcript(const std::string& transcript_id) const;

  CloudServiceOptions options_;
  std::shared_ptr<const inference::TextModel> llm_;
  std::shared_ptr<RequestLog> log_;
};

/// Wraps a handler result: if the body fails the privacy gate it is
/// replaced by a 500 naming the violated rules.
Reply gate_outbound(Reply reply);

/// Applies a Reply to an httplib response.
void send(const Reply& reply, httplib::Response& res);

/// Blocks serving on host:port until the server is stopped.
bool listen(httplib::Server& server, const std::string& host, int port);

}  // namespace glt::gateway

namespace glt {
struct RunConfig;
}

namespace glt::gateway {

struct ListenOptions {
  std::string host = "127.0.0.1";
  int port = 8090;
};

/// Serves `server` until SIGINT/SIGTERM.
int run_until_signal(httplib::Server& server, const ListenOptions& listen_on, std::ostream& out,
                     std::string_view name);

/// Runs the cloud QA service until SIGINT/SIGTERM. Uses the mock text model
/// when `config.mock` is set.
int serve_cloud(const RunConfig& config, CloudServiceOptions options, const ListenOptions& listen_on,
                std::ostream& out);

}  // namespace glt::gateway
