#include "glt/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "glt/digest.hpp"
#include "glt/error.hpp"

namespace glt::pipeline {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Runs `task(i)` for i in [0, count) on up to `threads` threads. The first
/// exception stops further work and is rethrown.
template <typename Task>
void parallel_for(std::size_t count, int threads, Task&& task) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  const auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  const auto n = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

ThrottledVision::ThrottledVision(const inference::VisionModel& inner, int limit)
    : inner_(inner), slots_(std::clamp(limit, 1, 1024)) {}

std::string ThrottledVision::caption(const media::FrameRecord& frame, const inference::PromptPair& prompts,
                                     const inference::DecodingConfig& decoding) const {
  SlotGuard guard(slots_);
  return inner_.caption(frame, prompts, decoding);
}

ThrottledText::ThrottledText(const inference::TextModel& inner, int limit)
    : inner_(inner), slots_(std::clamp(limit, 1, 1024)) {}

std::string ThrottledText::complete(const inference::PromptPair& prompts,
                                    const inference::DecodingConfig& decoding) const {
  SlotGuard guard(slots_);
  return inner_.complete(prompts, decoding);
}

std::string prompt_digest(Mode mode, const GridSpec& grid) {
  std::vector<std::string> parts;
  if (wants_global(mode)) parts.push_back(prompting::global_prompt().user);
  if (wants_local(mode)) {
    const auto local = prompting::local_prompt(grid);
    parts.push_back(local.system.value_or(""));
    parts.push_back(local.user);
  }
  return content_digest(nlohmann::json(parts).dump());
}

transcript::Transcript transcribe(const media::FrameSequence& frames, const inference::VisionModel& vlm,
                                  const TranscribeOptions& options) {
  if (frames.frames.empty()) throw Error(ErrorKind::EmptyVideo, "no frames in " + frames.source_id);
  options.decoding.validate();
  const bool want_global = wants_global(options.mode);
  const bool want_local = wants_local(options.mode);
  if (want_local) options.grid.validate();

  transcript::TranscriptHeader header;
  header.source_id = frames.source_id;
  header.fps = frames.fps;
  if (want_local) header.grid = options.grid;
  header.provenance.vlm_model = vlm.model_id();
  header.provenance.decoding = options.decoding;
  header.provenance.prompt_digest = prompt_digest(options.mode, options.grid);
  header.provenance.created_at = options.created_at.empty() ? utc_timestamp() : options.created_at;

  std::vector<transcript::FrameMeta> meta;
  meta.reserve(frames.size());
  for (const auto& f : frames.frames) meta.push_back({f.index, f.timestamp_s});

  const auto global_prompts = prompting::global_prompt();
  const auto local_prompts = want_local ? prompting::local_prompt(options.grid) : prompting::PromptPair{};
  transcript::TranscriptBuilder builder(std::move(meta), std::move(header), want_global, want_local);

  // Task t covers frame t / per_frame; the low bit picks global vs local when both run.
  const std::size_t per_frame = (want_global ? 1 : 0) + (want_local ? 1 : 0);
  parallel_for(frames.size() * per_frame, options.parallelism, [&](std::size_t t) {
    const auto pos = t / per_frame;
    const bool is_local = want_local && (!want_global || t % per_frame == 1);
    const auto& frame = frames.frames[pos];
    if (is_local) {
      builder.set_local(pos, vlm.caption(media::overlay_grid(frame, options.grid), local_prompts, options.decoding));
    } else {
      builder.set_global(pos, vlm.caption(frame, global_prompts, options.decoding));
    }
  });
  return builder.finalize();
}

media::FrameSequence load_media(const fs::path& locator, const RunConfig& cfg) {
  if (fs::is_directory(locator)) {
    return media::load_frame_dir(locator, fs::exists(locator / "frames.json") ? std::nullopt
                                                                               : std::optional<Rational>(cfg.fps));
  }
  media::DecoderConfig decoder;
  if (!cfg.decoder_command.empty()) decoder.command_template = cfg.decoder_command;
  return media::extract_frames(locator, cfg.fps, decoder);
}

std::string cache_key(const std::string& video_id, const RunConfig& config, const std::string& vlm_model) {
  ordered_json j;
  j["video_id"] = video_id;
  j["mode"] = to_string(config.mode);
  if (wants_local(config.mode)) {
    j["grid"] = {config.grid.rows, config.grid.cols, config.grid.line_color, config.grid.line_thickness_px};
  }
  j["fps"] = config.fps.to_string();
  j["model"] = vlm_model;
  j["decoding"] = config.vlm.decoding.to_json();
  j["prompts"] = prompt_digest(config.mode, config.grid);
  return video_id + "-" + content_digest(j.dump()).substr(0, 16);
}

namespace {

struct VideoOutcome {
  std::vector<qa::Prediction> predictions;
  std::vector<Failure> failures;
  bool cache_hit = false;
  bool transcribed = false;
};

void write_file(const fs::path& path, const std::string& body) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

BenchmarkResult run_benchmark(const eval::Dataset& dataset, const RunConfig& config,
                              const inference::VisionModel& vlm, const inference::TextModel& llm,
                              const fs::path& out_dir) {
  config.validate();
  const auto started_at = utc_timestamp();
  fs::create_directories(out_dir / "transcripts");
  if (!config.cache_dir.empty()) fs::create_directories(config.cache_dir);

  ThrottledVision throttled_vlm(vlm, config.parallelism);
  ThrottledText throttled_llm(llm, config.parallelism);
  const auto videos = dataset.by_video();
  std::vector<VideoOutcome> outcomes(videos.size());

  parallel_for(videos.size(), config.workers, [&](std::size_t v) {
    const auto& [video_id, items] = videos[v];
    auto& outcome = outcomes[v];
    const auto out_path = out_dir / "transcripts" / (video_id + std::string(transcript::kFileSuffix));
    std::optional<transcript::Transcript> t;
    try {
      const auto cache_path =
          config.cache_dir.empty() ? fs::path{}
                                   : config.cache_dir / (cache_key(video_id, config, vlm.model_id()) +
                                                         std::string(transcript::kFileSuffix));
      if (!cache_path.empty() && fs::exists(cache_path)) {
        try {
          t = transcript::load(cache_path);
          outcome.cache_hit = true;
        } catch (const Error&) {
          t.reset();  // unreadable cache entry: transcribe again
        }
      }
      if (!t) {
        const auto frames = load_media(dataset.video_index.at(video_id), config);
        TranscribeOptions options{config.mode, config.grid, config.vlm.decoding, config.parallelism, {}};
        t = transcribe(frames, throttled_vlm, options);
        outcome.transcribed = true;
        if (!cache_path.empty()) transcript::save(*t, cache_path);
      }
      transcript::save(*t, out_path);
    } catch (const Error& e) {
      outcome.failures.push_back({video_id, "", std::string(to_string(e.kind())), e.what()});
      return;
    }

    const auto text = transcript::render_text(*t);
    for (const auto* item : items) {
      try {
        outcome.predictions.push_back(
            qa::answer_text(text, *item, throttled_llm, config.llm.decoding, config.answer_fallback));
      } catch (const Error& e) {
        outcome.failures.push_back({video_id, item->question_id, std::string(to_string(e.kind())), e.what()});
      }
    }
  });

  BenchmarkResult result;
  for (auto& o : outcomes) {
    result.cache_hits += o.cache_hit ? 1 : 0;
    result.cache_misses += o.transcribed ? 1 : 0;
    for (auto& p : o.predictions) result.predictions.push_back(std::move(p));
    for (auto& f : o.failures) result.failures.push_back(std::move(f));
  }
  // re-establish dataset order independent of completion order
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < dataset.items.size(); ++i) order[dataset.items[i].question_id] = i;
  std::sort(result.predictions.begin(), result.predictions.end(),
            [&](const auto& a, const auto& b) { return order.at(a.question_id) < order.at(b.question_id); });

  result.report = eval::evaluate(result.predictions, dataset, config.fingerprint());

  auto& j = result.report_json;
  j["dataset"] = dataset.name;
  j["scenario"] = to_string(config.mode);
  j["config_fingerprint"] = result.report.config_fingerprint;
  const auto summary = result.report.to_json();
  for (const auto& [k, v] : summary.items()) {
    if (k != "config_fingerprint") j[k] = v;
  }
  j["abstain_policy"] = "scored as incorrect";
  j["failures"] = ordered_json::array();
  for (const auto& f : result.failures) {
    j["failures"].push_back(
        {{"video_id", f.video_id}, {"question_id", f.question_id}, {"error", f.error}, {"message", f.message}});
  }
  j["config"] = config.to_json();
  j["provenance"] = {{"started_at", started_at},
                     {"finished_at", utc_timestamp()},
                     {"cache_hits", result.cache_hits},
                     {"cache_misses", result.cache_misses}};

  std::string txt = "Dataset: " + dataset.name + "\n";
  txt += "Config fingerprint: " + result.report.config_fingerprint + "\n\n";
  txt += eval::render_table({{std::string(to_string(config.mode)), result.report}});
  txt += "\nAnswered " + std::to_string(result.report.total) + " question(s); " +
         std::to_string(result.report.abstain_count) + " abstained (scored as incorrect).\n";
  if (!result.failures.empty()) {
    txt += "\nFailures:\n";
    for (const auto& f : result.failures) {
      txt += "  " + f.video_id + (f.question_id.empty() ? "" : "/" + f.question_id) + ": " + f.message + "\n";
    }
  }
  result.report_text = txt;

  std::string preds;
  for (const auto& p : result.predictions) preds += qa::to_json(p).dump() + "\n";
  write_file(out_dir / "predictions.jsonl", preds);
  write_file(out_dir / "report.json", result.report_json.dump(2) + "\n");
  write_file(out_dir / "report.txt", result.report_text);
  return result;
}

}  // namespace glt::pipeline
