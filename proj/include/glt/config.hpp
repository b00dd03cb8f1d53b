#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "glt/inference.hpp"
#include "glt/types.hpp"

namespace glt {

/// Which captions a transcription run produces.
enum class Mode { Global, Local, LocalGlobal };

std::string_view to_string(Mode mode) noexcept;
/// "global", "local", "local+global". Errors: ConfigError.
Mode parse_mode(std::string_view text);
inline bool wants_global(Mode m) noexcept { return m != Mode::Local; }
inline bool wants_local(Mode m) noexcept { return m != Mode::Global; }

struct ModelEndpoint {
  std::string url;
  std::string model;
  std::string api_key;
  inference::DecodingConfig decoding;
};

/// Effective run configuration. Sources are layered: defaults, then the
/// JSON config file, then GLT_* environment variables, then CLI flags.
struct RunConfig {
  GridSpec grid;
  Mode mode = Mode::LocalGlobal;
  ModelEndpoint vlm{"http://127.0.0.1:8000", "llava-v1.6-mistral-7b", "", inference::DecodingConfig::vision_default()};
  ModelEndpoint llm{"http://127.0.0.1:8001", "llama-3.1-8b-instruct", "", inference::DecodingConfig::text_default()};
  Rational fps{1};
  int parallelism = 4;  // in-flight model requests
  int workers = 2;      // videos processed concurrently
  int timeout_s = 120;
  int retries = 3;
  std::filesystem::path cache_dir = ".glt-cache";
  bool mock = false;
  bool answer_fallback = true;
  std::string decoder_command;  // empty = built-in ffmpeg template

  /// Errors: ConfigError naming the field.
  void validate() const;

  /// Model ids actually used (mock ids in mock mode).
  std::string effective_vlm_model() const { return mock ? "mock-vlm" : vlm.model; }
  std::string effective_llm_model() const { return mock ? "mock-llm" : llm.model; }

  /// Digest over everything that can change model outputs: mode, grid (when
  /// used), model ids, decoding, fps, prompt templates, answer extraction.
  std::string fingerprint() const;

  /// Secrets are masked.
  nlohmann::ordered_json to_json() const;
  /// Overlays keys present in `j` onto `*this`. Errors: ConfigError.
  void merge_json(const nlohmann::json& j);
  /// Overlays GLT_* variables read through `getenv`.
  void merge_env(const std::function<const char*(const char*)>& getenv);

  inference::EndpointConfig vlm_endpoint() const;
  inference::EndpointConfig llm_endpoint() const;
};

/// Defaults <- file (if given) <- environment.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::function<const char*(const char*)>& getenv);

/// Current UTC time, ISO-8601 with seconds.
std::string utc_timestamp();

}  // namespace glt
