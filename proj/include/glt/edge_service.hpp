#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "glt/config.hpp"
#include "glt/gateway.hpp"
#include "glt/transcript.hpp"
#include "glt/vision.hpp"

namespace glt::gateway {

/// Summary of a stored transcript; the only thing the edge hands out besides
/// the transcript text itself.
struct TranscriptManifest {
  std::string transcript_id;  // content digest of the serialized transcript
  std::string source_id;
  std::string created_at;
  std::size_t entry_count = 0;
  std::optional<GridSpec> grid;
  std::size_t byte_size = 0;

  nlohmann::ordered_json to_json() const;
};

/// Stores serialized transcripts under their content digest.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);
  /// Atomic (temp file + rename). Returns the manifest.
  TranscriptManifest put(const transcript::Transcript& t) const;
  /// nullopt for unknown or malformed ids.
  std::optional<std::string> get(const std::string& transcript_id) const;

 private:
  std::filesystem::path dir_;
};

/// Edge side of the deployment: owns the videos and the vision model.
///
///   POST /v1/transcribe       {video_id, config?: {mode, grid, fps}} -> manifest
///   GET  /v1/transcripts/{id} -> .glt.jsonl body
///   GET  /healthz
struct EdgeServiceOptions {
  RunConfig config;
  std::filesystem::path store_dir = "transcripts";
  std::map<std::string, std::filesystem::path> videos;  // video_id -> locator
  std::string auth_token;
  std::ostream* log = nullptr;
};

/// video_id -> locator for every sub-directory or file directly under `dir`.
std::map<std::string, std::filesystem::path> index_videos(const std::filesystem::path& dir);

class EdgeService {
 public:
  EdgeService(EdgeServiceOptions options, std::shared_ptr<const inference::VisionModel> vlm);

  Reply transcribe(std::string_view body) const;
  Reply get_transcript(const std::string& transcript_id) const;
  Reply healthz() const;

  void mount(httplib::Server& server);

 private:
  EdgeServiceOptions options_;
  std::shared_ptr<const inference::VisionModel> vlm_;
  TranscriptStore store_;
  std::shared_ptr<RequestLog> log_;
};

}  // namespace glt::gateway

namespace glt::gateway {

/// Runs the edge transcriber until SIGINT/SIGTERM. Uses the mock vision
/// model when `options.config.mock` is set.
int serve_edge(EdgeServiceOptions options, const ListenOptions& listen_on, std::ostream& out);

}  // namespace glt::gateway
