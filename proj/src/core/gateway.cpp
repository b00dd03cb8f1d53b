#include "glt/gateway.hpp"

#include <httplib.h>

#include <atomic>
#include <csignal>
#include <regex>

#include "glt/config.hpp"
#include "glt/digest.hpp"
#include "glt/error.hpp"
#include "glt/transcript.hpp"

namespace glt::gateway {
using nlohmann::json;
using nlohmann::ordered_json;

Reply json_reply(int status, const ordered_json& body) { return {status, body.dump(), "application/json"}; }

Reply error_reply(int status, std::string_view error, std::string_view message) {
  return json_reply(status, {{"error", error}, {"message", message}});
}

int status_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EndpointUnreachable:
    case ErrorKind::Timeout: return 503;
    case ErrorKind::HttpError:
    case ErrorKind::MalformedResponse: return 502;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::PrivacyViolation: return 422;
    case ErrorKind::DecoderNotFound:
    case ErrorKind::IoError: return 500;
    case ErrorKind::DecodeFailure:
    case ErrorKind::EmptyVideo:
    case ErrorKind::MissingIndex:
    case ErrorKind::UnreadableImage:
    case ErrorKind::FrameTooSmall: return 422;
    default: return 400;
  }
}

void RequestLog::record(std::string_view method, std::string_view path, int status, std::string_view request_body,
                        std::string_view response_body, std::chrono::milliseconds elapsed) {
  if (sink_ == nullptr) return;
  ordered_json line{{"ts", utc_timestamp()},
                    {"service", service_},
                    {"method", method},
                    {"path", path},
                    {"status", status},
                    {"req_bytes", request_body.size()},
                    {"req_digest", content_digest(request_body).substr(0, 16)},
                    {"resp_bytes", response_body.size()},
                    {"resp_digest", content_digest(response_body).substr(0, 16)},
                    {"ms", elapsed.count()}};
  std::lock_guard lock(mu_);
  *sink_ << line.dump() << "\n" << std::flush;
}

bool authorized(std::string_view header, std::string_view token) {
  if (token.empty()) return true;
  constexpr std::string_view kPrefix = "Bearer ";
  return header.size() == kPrefix.size() + token.size() && header.substr(0, kPrefix.size()) == kPrefix &&
         header.substr(kPrefix.size()) == token;
}

Reply gate_outbound(Reply reply) {
  const auto verdict = privacy_gate(reply.body, reply.content_type);
  if (verdict.ok) return reply;
  ordered_json v = ordered_json::array();
  for (const auto& x : verdict.violations) v.push_back({{"path", x.path}, {"rule", x.rule_id}});
  return json_reply(500, {{"error", "PrivacyViolation"},
                          {"message", "response withheld by privacy gate"},
                          {"rules_version", kPrivacyRulesVersion},
                          {"violations", v}});
}

void send(const Reply& reply, httplib::Response& res) {
  res.status = reply.status;
  res.set_content(reply.body, reply.content_type);
}

bool listen(httplib::Server& server, const std::string& host, int port) { return server.listen(host, port); }

CloudService::CloudService(CloudServiceOptions options, std::shared_ptr<const inference::TextModel> llm)
    : options_(std::move(options)), llm_(std::move(llm)), log_(std::make_shared<RequestLog>("cloud", options_.log)) {}

Reply CloudService::healthz() const {
  return json_reply(200, {{"status", "ok"}, {"service", "cloud-qa"}, {"model", llm_->model_id()}});
}

namespace {

Reply privacy_rejection(const PrivacyVerdict& verdict, std::string_view what) {
  ordered_json v = ordered_json::array();
  for (const auto& x : verdict.violations) v.push_back({{"path", x.path}, {"rule", x.rule_id}});
  return json_reply(422, {{"error", "PrivacyViolation"},
                          {"message", std::string(what) + " contains image data"},
                          {"rules_version", kPrivacyRulesVersion},
                          {"violations", v}});
}

bool is_transcript_id(const std::string& id) {
  static const std::regex hex64("[0-9a-f]{64}");
  return std::regex_match(id, hex64);
}

}  // namespace

std::string CloudService::fetch_transcript(const std::string& transcript_id) const {
  if (options_.edge_url.empty()) throw Error(ErrorKind::NotFound, "no edge configured to resolve transcript ids");
  const auto& url = options_.edge_url;
  const auto scheme_end = url.find("://");
  const auto path_start = scheme_end == std::string::npos ? std::string::npos : url.find('/', scheme_end + 3);
  httplib::Client cli(url.substr(0, path_start));
  const auto secs = options_.edge_timeout.count() / 1000;
  const auto usecs = (options_.edge_timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  httplib::Headers headers;
  if (!options_.edge_token.empty()) headers.emplace("Authorization", "Bearer " + options_.edge_token);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  auto res = cli.Get(prefix + "/v1/transcripts/" + transcript_id, headers);
  if (!res) throw Error(ErrorKind::EndpointUnreachable, "edge: " + httplib::to_string(res.error()));
  if (res->status == 404) throw Error(ErrorKind::NotFound, "unknown transcript " + transcript_id);
  if (res->status != 200) throw Error(ErrorKind::HttpError, "edge returned " + std::to_string(res->status), res->status);
  if (content_digest(res->body) != transcript_id) {
    throw Error(ErrorKind::MalformedResponse, "edge transcript does not match its id");
  }
  return res->body;
}

Reply CloudService::ask(std::string_view body, std::string_view content_type) const {
  if (const auto verdict = privacy_gate(body, content_type); !verdict.ok) return privacy_rejection(verdict, "request");

  const auto req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_reply(400, "InvalidRequest", "body must be a JSON object");
  try {
    if (req.contains("gold_index")) return error_reply(400, "InvalidRequest", "gold_index is not accepted");
    const bool has_id = req.contains("transcript_id");
    const bool has_inline = req.contains("transcript");
    if (has_id == has_inline) {
      return error_reply(400, "InvalidRequest", "exactly one of transcript_id or transcript is required");
    }
    qa::QAItem item;
    item.question_id = req.value("question_id", std::string("q"));
    item.question = req.at("question").get<std::string>();
    item.options = req.at("options").get<std::vector<std::string>>();

    std::string jsonl;
    if (has_inline) {
      jsonl = req.at("transcript").get<std::string>();
    } else {
      const auto id = req.at("transcript_id").get<std::string>();
      if (!is_transcript_id(id)) return error_reply(404, "NotFound", "unknown transcript id");
      jsonl = fetch_transcript(id);
      if (const auto verdict = privacy_gate(jsonl, "application/x-ndjson"); !verdict.ok) {
        return privacy_rejection(verdict, "transcript");
      }
    }
    const auto t = transcript::parse(jsonl);
    const auto p = qa::answer(t, item, *llm_, options_.decoding, options_.answer_fallback);
    auto out = qa::to_json(p);
    out["chosen_letter"] = p.chosen_index ? ordered_json(std::string(1, prompting::option_letter(*p.chosen_index)))
                                          : ordered_json(nullptr);
    return json_reply(200, out);
  } catch (const Error& e) {
    return error_reply(status_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    return error_reply(400, "InvalidRequest", e.what());
  }
}

void CloudService::mount(httplib::Server& server) {
  const auto wrap = [this](auto handler, bool needs_auth = true) {
    return [this, handler, needs_auth](const httplib::Request& req, httplib::Response& res) {
      const auto start = std::chrono::steady_clock::now();
      Reply reply = !needs_auth || authorized(req.get_header_value("Authorization"), options_.auth_token)
                        ? gate_outbound(handler(req))
                        : error_reply(401, "Unauthorized", "missing or invalid bearer token");
      send(reply, res);
      log_->record(req.method, req.path, reply.status, req.body, reply.body,
                   std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start));
    };
  };
  server.Post("/v1/ask", wrap([this](const httplib::Request& req) {
                return ask(req.body, req.get_header_value("Content-Type"));
              }));
  server.Get("/healthz", wrap([this](const httplib::Request&) { return healthz(); }, false));
}

}  // namespace glt::gateway

namespace glt::gateway {
namespace {

std::atomic<httplib::Server*> g_active_server{nullptr};

extern "C" void stop_active_server(int) {
  if (auto* s = g_active_server.load()) s->stop();
}

}  // namespace

int run_until_signal(httplib::Server& server, const ListenOptions& listen_on, std::ostream& out,
                     std::string_view name) {
  g_active_server = &server;
  std::signal(SIGINT, stop_active_server);
  std::signal(SIGTERM, stop_active_server);
  out << name << " listening on " << listen_on.host << ":" << listen_on.port << std::endl;
  const bool ok = server.listen(listen_on.host, listen_on.port);
  g_active_server = nullptr;
  return ok ? 0 : 1;
}

int serve_cloud(const RunConfig& config, CloudServiceOptions options, const ListenOptions& listen_on,
                std::ostream& out) {
  config.validate();
  std::shared_ptr<const inference::TextModel> llm;
  if (config.mock) {
    llm = std::make_shared<inference::MockLlm>();
  } else {
    llm = std::make_shared<inference::HttpTextModel>(config.llm_endpoint());
  }
  options.decoding = config.llm.decoding;
  options.answer_fallback = config.answer_fallback;
  CloudService service(std::move(options), std::move(llm));
  httplib::Server server;
  service.mount(server);
  return run_until_signal(server, listen_on, out, "cloud-qa");
}

}  // namespace glt::gateway
