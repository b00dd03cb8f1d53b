#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glt/config.hpp"
#include "glt/eval.hpp"
#include "glt/media.hpp"
#include "glt/transcript.hpp"
#include "glt/vision.hpp"

namespace glt::pipeline {

struct TranscribeOptions {
  Mode mode = Mode::LocalGlobal;
  GridSpec grid;
  inference::DecodingConfig decoding = inference::DecodingConfig::vision_default();
  int parallelism = 4;
  std::string created_at;  // empty = now
};

/// Captions every frame (plain frame with the global prompt, gridded frame
/// with the local prompt, as the mode asks) with up to `parallelism` requests
/// in flight, then ensembles per frame.
transcript::Transcript transcribe(const media::FrameSequence& frames, const inference::VisionModel& vlm,
                                  const TranscribeOptions& options);

/// Loads a frame directory (sidecar fps wins over `cfg.fps`) or decodes a video file.
media::FrameSequence load_media(const std::filesystem::path& locator, const RunConfig& cfg);

/// Digest over the prompts a run sends to the vision model.
std::string prompt_digest(Mode mode, const GridSpec& grid);

/// Caps concurrent calls into a wrapped model.
class ThrottledVision final : public inference::VisionModel {
 public:
  ThrottledVision(const inference::VisionModel& inner, int limit);
  std::string caption(const media::FrameRecord& frame, const inference::PromptPair& prompts,
                      const inference::DecodingConfig& decoding) const override;
  std::string model_id() const override { return inner_.model_id(); }

 private:
  const inference::VisionModel& inner_;
  mutable std::counting_semaphore<1024> slots_;
};

class ThrottledText final : public inference::TextModel {
 public:
  ThrottledText(const inference::TextModel& inner, int limit);
  std::string complete(const inference::PromptPair& prompts, const inference::DecodingConfig& decoding) const override;
  std::string model_id() const override { return inner_.model_id(); }

 private:
  const inference::TextModel& inner_;
  mutable std::counting_semaphore<1024> slots_;
};

struct Failure {
  std::string video_id;
  std::string question_id;  // empty when the whole video failed
  std::string error;        // ErrorKind name
  std::string message;
};

struct BenchmarkResult {
  eval::EvalReport report;
  std::vector<qa::Prediction> predictions;  // dataset order
  std::vector<Failure> failures;
  int cache_hits = 0;
  int cache_misses = 0;
  nlohmann::ordered_json report_json;  // the content of report.json
  std::string report_text;             // the content of report.txt

  bool ok() const noexcept { return failures.empty(); }
};

/// Transcribes each video once (reusing cached transcripts keyed by video,
/// grid, model and decoding), answers its questions, and scores the run.
/// Writes report.json, report.txt, predictions.jsonl and
/// transcripts/<video_id>.glt.jsonl under `out_dir`. Per-video and
/// per-question failures are reported, not thrown.
BenchmarkResult run_benchmark(const eval::Dataset& dataset, const RunConfig& config,
                              const inference::VisionModel& vlm, const inference::TextModel& llm,
                              const std::filesystem::path& out_dir);

/// Cache file name for a video under a configuration.
std::string cache_key(const std::string& video_id, const RunConfig& config, const std::string& vlm_model);

}  // namespace glt::pipeline
