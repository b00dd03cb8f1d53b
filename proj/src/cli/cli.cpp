#include "glt/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "glt/config.hpp"
#include "glt/digest.hpp"
#include "glt/edge_service.hpp"
#include "glt/error.hpp"
#include "glt/eval.hpp"
#include "glt/gateway.hpp"
#include "glt/pipeline.hpp"
#include "glt/qa.hpp"

namespace glt::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EndpointUnreachable:
    case ErrorKind::HttpError:
    case ErrorKind::MalformedResponse:
    case ErrorKind::Timeout:
    case ErrorKind::InvalidRequest: return kInferenceError;
    case ErrorKind::DecoderNotFound:
    case ErrorKind::DecodeFailure:
    case ErrorKind::EmptyVideo:
    case ErrorKind::MissingIndex:
    case ErrorKind::UnreadableImage:
    case ErrorKind::FrameTooSmall: return kDecodeError;
    case ErrorKind::IncompleteTranscript: return kFailure;
    default: return kConfigError;
  }
}

/// Flags layered over file + environment configuration.
struct Overrides {
  std::string config_file;
  bool json = false;
  bool mock = false;
  std::string grid;
  std::string mode;
  std::string fps;
  std::string vlm_url, vlm_model, llm_url, llm_model;
  std::optional<int> parallelism, workers, timeout_s, retries;
  std::string cache_dir;
  std::string decoder;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_file, "JSON config file");
    app.add_flag("--json", json, "Machine-readable output");
    app.add_flag("--mock", mock, "Use the deterministic mock models (no network)");
    app.add_option("--grid", grid, "Grid layout RxC, e.g. 2x3");
    app.add_option("--mode", mode, "global | local | local+global");
    app.add_option("--fps", fps, "Sampling rate, e.g. 1 or 30000/1001");
    app.add_option("--vlm-url", vlm_url, "Vision model base URL");
    app.add_option("--vlm-model", vlm_model, "Vision model id");
    app.add_option("--llm-url", llm_url, "Text model base URL");
    app.add_option("--llm-model", llm_model, "Text model id");
    app.add_option("--parallelism", parallelism, "Max in-flight model requests");
    app.add_option("--workers", workers, "Videos processed concurrently");
    app.add_option("--timeout", timeout_s, "Per-request timeout in seconds");
    app.add_option("--retries", retries, "Retries per request");
    app.add_option("--cache-dir", cache_dir, "Transcript cache directory");
    app.add_option("--decoder", decoder, "Decoder command template ({input} {fps} {outdir})");
  }

  RunConfig resolve() const {
    auto cfg = load_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file),
                           [](const char* name) { return std::getenv(name); });
    if (mock) cfg.mock = true;
    if (!mode.empty()) cfg.mode = parse_mode(mode);
    if (!grid.empty()) {
      const auto parsed = GridSpec::parse(grid);
      cfg.grid.rows = parsed.rows;
      cfg.grid.cols = parsed.cols;
    }
    if (!fps.empty()) cfg.fps = Rational::parse(fps);
    if (!vlm_url.empty()) cfg.vlm.url = vlm_url;
    if (!vlm_model.empty()) cfg.vlm.model = vlm_model;
    if (!llm_url.empty()) cfg.llm.url = llm_url;
    if (!llm_model.empty()) cfg.llm.model = llm_model;
    if (parallelism) cfg.parallelism = *parallelism;
    if (workers) cfg.workers = *workers;
    if (timeout_s) cfg.timeout_s = *timeout_s;
    if (retries) cfg.retries = *retries;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    if (!decoder.empty()) cfg.decoder_command = decoder;
    cfg.validate();
    return cfg;
  }
};

std::unique_ptr<inference::VisionModel> make_vlm(const RunConfig& cfg) {
  if (cfg.mock) return std::make_unique<inference::MockVlm>();
  return std::make_unique<inference::HttpVisionModel>(cfg.vlm_endpoint());
}

std::unique_ptr<inference::TextModel> make_llm(const RunConfig& cfg) {
  if (cfg.mock) return std::make_unique<inference::MockLlm>();
  return std::make_unique<inference::HttpTextModel>(cfg.llm_endpoint());
}

int cmd_transcribe(const Overrides& o, const std::string& input, const std::string& out_path, std::ostream& out,
                   std::ostream& err) {
  const auto cfg = o.resolve();
  if (cfg.mode == Mode::Global && !o.grid.empty()) {
    err << "warning: --grid is ignored in global mode\n";
  }
  const auto frames = pipeline::load_media(input, cfg);
  const auto vlm = make_vlm(cfg);
  pipeline::TranscribeOptions opts{cfg.mode, cfg.grid, cfg.vlm.decoding, cfg.parallelism, {}};
  const auto t = pipeline::transcribe(frames, *vlm, opts);

  const fs::path path = out_path.empty() ? fs::path(t.header.source_id + std::string(transcript::kFileSuffix)) : fs::path(out_path);
  transcript::save(t, path);
  const auto body = transcript::serialize(t);

  ordered_json manifest;
  manifest["transcript_id"] = content_digest(body);
  manifest["path"] = path.string();
  manifest["source_id"] = t.header.source_id;
  manifest["entry_count"] = t.entries.size();
  manifest["mode"] = to_string(cfg.mode);
  manifest["grid"] = t.header.grid ? ordered_json(t.header.grid->label()) : ordered_json(nullptr);
  manifest["byte_size"] = body.size();
  manifest["config"] = cfg.to_json();
  if (o.json) {
    out << manifest.dump() << "\n";
  } else {
    out << "wrote " << path.string() << " (" << t.entries.size() << " frames, mode " << to_string(cfg.mode)
        << ", id " << manifest["transcript_id"].get<std::string>().substr(0, 12) << ")\n";
  }
  return kOk;
}

int cmd_ask(const Overrides& o, const std::string& transcript_path, const std::string& question,
            const std::vector<std::string>& options, std::ostream& out) {
  const auto cfg = o.resolve();
  const auto t = transcript::load(transcript_path);
  const auto llm = make_llm(cfg);
  qa::QAItem item;
  item.question_id = "cli";
  item.question = question;
  item.options = options;
  const auto p = qa::answer(t, item, *llm, cfg.llm.decoding, cfg.answer_fallback);
  if (o.json) {
    auto j = qa::to_json(p);
    j["config"] = cfg.to_json();
    out << j.dump() << "\n";
  } else if (p.chosen_index) {
    out << prompting::option_letter(*p.chosen_index) << ". " << options[*p.chosen_index] << "  ("
        << qa::to_string(p.extraction_method) << ")\n";
  } else {
    out << "ABSTAIN  (raw: " << p.raw_output << ")\n";
  }
  return kOk;
}

int cmd_eval(const Overrides& o, const std::string& dataset_path, const std::string& out_dir, std::ostream& out,
             std::ostream& err) {
  const auto cfg = o.resolve();
  const auto dataset = eval::load_dataset(dataset_path);
  const auto vlm = make_vlm(cfg);
  const auto llm = make_llm(cfg);
  const auto result = pipeline::run_benchmark(dataset, cfg, *vlm, *llm, out_dir);
  if (o.json) {
    out << result.report_json.dump() << "\n";
  } else {
    out << result.report_text;
    out << "artifacts in " << out_dir << "\n";
  }
  if (result.ok()) return kOk;
  for (const auto& f : result.failures) {
    err << "failed: " << f.video_id << (f.question_id.empty() ? "" : "/" + f.question_id) << ": " << f.message << "\n";
  }
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grid-based local/global video transcription and transcript-only question answering"};
  app.name("glt");
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  o.add_to(app);

  std::string input, out_path;
  auto* transcribe = app.add_subcommand("transcribe", "Transcribe a video file or frame directory");
  transcribe->add_option("input", input, "Video file or frame directory")->required();
  transcribe->add_option("-o,--out", out_path, "Output .glt.jsonl path");

  std::string transcript_path, question;
  std::vector<std::string> options;
  auto* ask = app.add_subcommand("ask", "Answer a multiple-choice question from a transcript");
  ask->add_option("transcript", transcript_path, "Transcript .glt.jsonl")->required();
  ask->add_option("-q,--question", question, "Question text")->required();
  ask->add_option("--options", options, "Comma-separated answer options (2..5)")->required()->delimiter(',');

  std::string dataset_path, eval_out = "glt-run";
  auto* evalc = app.add_subcommand("eval", "Run a benchmark over a canonical dataset");
  evalc->add_option("dataset", dataset_path, "Dataset JSON")->required();
  evalc->add_option("-o,--out", eval_out, "Output directory");

  gateway::ListenOptions edge_listen{"127.0.0.1", 8080};
  std::string videos_dir = "videos", store_dir = "transcripts", edge_token;
  auto* serve_edge = app.add_subcommand("serve-edge", "Run the edge transcriber service");
  serve_edge->add_option("--host", edge_listen.host);
  serve_edge->add_option("--port", edge_listen.port);
  serve_edge->add_option("--videos", videos_dir, "Directory of videos / frame directories");
  serve_edge->add_option("--store", store_dir, "Transcript store directory");
  serve_edge->add_option("--token", edge_token, "Bearer token required from callers");

  gateway::ListenOptions qa_listen{"127.0.0.1", 8090};
  gateway::CloudServiceOptions cloud;
  auto* serve_qa = app.add_subcommand("serve-qa", "Run the cloud question-answering service");
  serve_qa->add_option("--host", qa_listen.host);
  serve_qa->add_option("--port", qa_listen.port);
  serve_qa->add_option("--edge-url", cloud.edge_url, "Edge base URL for transcript pulls");
  serve_qa->add_option("--edge-token", cloud.edge_token, "Bearer token presented to the edge");
  serve_qa->add_option("--token", cloud.auth_token, "Bearer token required from callers");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  try {
    if (*transcribe) return cmd_transcribe(o, input, out_path, out, err);
    if (*ask) return cmd_ask(o, transcript_path, question, options, out);
    if (*evalc) return cmd_eval(o, dataset_path, eval_out, out, err);
    if (*serve_edge) {
      gateway::EdgeServiceOptions opts;
      opts.config = o.resolve();
      opts.store_dir = store_dir;
      opts.videos = gateway::index_videos(videos_dir);
      opts.auth_token = edge_token;
      opts.log = &err;
      return gateway::serve_edge(std::move(opts), edge_listen, out);
    }
    if (*serve_qa) {
      cloud.log = &err;
      return gateway::serve_cloud(o.resolve(), cloud, qa_listen, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace glt::cli
