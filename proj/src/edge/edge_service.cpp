#include "glt/edge_service.hpp"

#include <httplib.h>

#include <fstream>
#include <iterator>
#include <regex>

#include "glt/digest.hpp"
#include "glt/error.hpp"
#include "glt/pipeline.hpp"

namespace glt::gateway {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

ordered_json TranscriptManifest::to_json() const {
  ordered_json j;
  j["transcript_id"] = transcript_id;
  j["source_id"] = source_id;
  j["created_at"] = created_at;
  j["entry_count"] = entry_count;
  j["grid"] = grid ? ordered_json(grid->label()) : ordered_json(nullptr);
  j["byte_size"] = byte_size;
  return j;
}

namespace {

bool valid_id(const std::string& id) {
  static const std::regex hex64("[0-9a-f]{64}");
  return std::regex_match(id, hex64);
}

}  // namespace

TranscriptStore::TranscriptStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

TranscriptManifest TranscriptStore::put(const transcript::Transcript& t) const {
  const auto body = transcript::serialize(t);
  TranscriptManifest m;
  m.transcript_id = content_digest(body);
  m.source_id = t.header.source_id;
  m.created_at = t.header.provenance.created_at;
  m.entry_count = t.entries.size();
  m.grid = t.header.grid;
  m.byte_size = body.size();
  transcript::save(t, dir_ / (m.transcript_id + std::string(transcript::kFileSuffix)));
  return m;
}

std::optional<std::string> TranscriptStore::get(const std::string& transcript_id) const {
  if (!valid_id(transcript_id)) return std::nullopt;
  std::ifstream in(dir_ / (transcript_id + std::string(transcript::kFileSuffix)), std::ios::binary);
  if (!in) return std::nullopt;
  return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, fs::path> index_videos(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::ConfigError, "video directory not found: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto id = entry.is_directory() ? entry.path().filename().string() : entry.path().stem().string();
    if (!id.empty() && id[0] != '.') out[id] = entry.path();
  }
  return out;
}

EdgeService::EdgeService(EdgeServiceOptions options, std::shared_ptr<const inference::VisionModel> vlm)
    : options_(std::move(options)),
      vlm_(std::move(vlm)),
      store_(options_.store_dir),
      log_(std::make_shared<RequestLog>("edge", options_.log)) {}

Reply EdgeService::healthz() const {
  return json_reply(200, {{"status", "ok"}, {"service", "edge-transcriber"}, {"model", vlm_->model_id()}});
}

Reply EdgeService::transcribe(std::string_view body) const {
  const auto req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_reply(400, "InvalidRequest", "body must be a JSON object");
  try {
    const auto video_id = req.at("video_id").get<std::string>();
    const auto it = options_.videos.find(video_id);
    if (it == options_.videos.end()) return error_reply(404, "NotFound", "unknown video '" + video_id + "'");

    RunConfig cfg = options_.config;
    if (req.contains("config")) {
      const auto& c = req.at("config");
      if (!c.is_object()) return error_reply(400, "ConfigError", "config must be an object");
      json allowed = json::object();
      for (const char* key : {"mode", "grid", "fps"}) {
        if (c.contains(key)) allowed[key] = c.at(key);
      }
      cfg.merge_json(allowed);
    }
    cfg.validate();

    const auto frames = pipeline::load_media(it->second, cfg);
    pipeline::TranscribeOptions opts{cfg.mode, cfg.grid, cfg.vlm.decoding, cfg.parallelism, {}};
    auto t = pipeline::transcribe(frames, *vlm_, opts);
    t.header.source_id = video_id;
    return json_reply(200, store_.put(t).to_json());
  } catch (const Error& e) {
    return error_reply(status_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    return error_reply(400, "InvalidRequest", e.what());
  }
}

Reply EdgeService::get_transcript(const std::string& transcript_id) const {
  auto body = store_.get(transcript_id);
  if (!body) return error_reply(404, "NotFound", "unknown transcript id");
  return {200, std::move(*body), "application/x-ndjson"};
}

void EdgeService::mount(httplib::Server& server) {
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
  server.Post("/v1/transcribe", wrap([this](const httplib::Request& req) { return transcribe(req.body); }));
  server.Get(R"(/v1/transcripts/([^/]+))",
             wrap([this](const httplib::Request& req) { return get_transcript(req.matches[1].str()); }));
  server.Get("/healthz", wrap([this](const httplib::Request&) { return healthz(); }, false));
}

}  // namespace glt::gateway

namespace glt::gateway {

int serve_edge(EdgeServiceOptions options, const ListenOptions& listen_on, std::ostream& out) {
  options.config.validate();
  std::shared_ptr<const inference::VisionModel> vlm;
  if (options.config.mock) {
    vlm = std::make_shared<inference::MockVlm>();
  } else {
    vlm = std::make_shared<inference::HttpVisionModel>(options.config.vlm_endpoint());
  }
  EdgeService service(std::move(options), std::move(vlm));
  httplib::Server server;
  service.mount(server);
  return run_until_signal(server, listen_on, out, "edge-transcriber");
}

}  // namespace glt::gateway
