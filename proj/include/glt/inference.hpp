#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "glt/prompting.hpp"

namespace glt::inference {

using prompting::PromptPair;

struct DecodingConfig {
  double temperature = 1.0;
  int min_new_tokens = 100;
  int max_new_tokens = 1000;
  std::optional<std::int64_t> seed;

  /// Vision model defaults: temperature 1.0, 100..1000 new tokens.
  static DecodingConfig vision_default() { return {1.0, 100, 1000, std::nullopt}; }
  /// Text model defaults: temperature 0.1. Token bounds are ours; the answer format is short.
  static DecodingConfig text_default() { return {0.1, 1, 256, std::nullopt}; }

  /// Throws ConfigError.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static DecodingConfig from_json(const nlohmann::json& j, DecodingConfig defaults);

  friend bool operator==(const DecodingConfig&, const DecodingConfig&) = default;
};

/// Already-encoded image bytes. The text side never decodes these.
struct ImagePayload {
  std::string mime = "image/png";
  std::string bytes;
};

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  DecodingConfig decoding;
  std::string model_id;
};

/// Only this type can carry an image, so text-only requests cannot leak one.
struct VisionChatRequest : ChatRequest {
  ImagePayload image;
};

struct ChatResponse {
  std::string text;
  std::int64_t token_count = 0;
  std::int64_t latency_ms = 0;
};

/// OpenAI-compatible chat-completions request bodies. `min_tokens` is a
/// non-standard extension that servers are free to ignore.
nlohmann::ordered_json to_wire(const ChatRequest& request);
nlohmann::ordered_json to_wire(const VisionChatRequest& request);
/// Reads choices[0].message.content. Errors: MalformedResponse.
ChatResponse parse_wire_response(std::string_view body);

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model_id;
  std::string api_key;
  std::chrono::milliseconds timeout{120'000};
  int retries = 3;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8'000};
};

/// POSTs to `{base_url}/v1/chat/completions`. Immutable after construction
/// and safe to share between threads. Transport failures, timeouts and
/// 429/5xx responses are retried up to `retries` times with exponential
/// backoff and an identical body.
class HttpChatClient {
 public:
  explicit HttpChatClient(EndpointConfig config);

  ChatResponse send(const ChatRequest& request) const;
  ChatResponse send(const VisionChatRequest& request) const;

  const EndpointConfig& config() const noexcept { return config_; }

 private:
  ChatResponse post(const std::string& body) const;
  ChatResponse post_once(const std::string& body) const;

  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

/// Text-only model used for question answering.
class TextModel {
 public:
  virtual ~TextModel() = default;
  /// Errors: InvalidRequest on empty user text, plus transport errors.
  virtual std::string complete(const PromptPair& prompts, const DecodingConfig& decoding) const = 0;
  virtual std::string model_id() const = 0;
};

class HttpTextModel final : public TextModel {
 public:
  explicit HttpTextModel(EndpointConfig config) : client_(std::move(config)) {}
  std::string complete(const PromptPair& prompts, const DecodingConfig& decoding) const override;
  std::string model_id() const override { return client_.config().model_id; }

 private:
  HttpChatClient client_;
};

/// Deterministic stand-in for the text model. Answers "answer [L] answer"
/// when the prompt carries a `GOLD=L` marker, or a keyed `GOLD[key]=L`
/// marker whose key appears as a whole token in the user message (keyed markers win).
/// Otherwise returns kMockLlmDistractor.
class MockLlm final : public TextModel {
 public:
  std::string complete(const PromptPair& prompts, const DecodingConfig& decoding) const override;
  std::string model_id() const override { return "mock-llm"; }
  std::int64_t calls() const noexcept { return calls_.load(); }

 private:
  mutable std::atomic<std::int64_t> calls_{0};
};

inline constexpr std::string_view kMockLlmDistractor =
    "I could not find enough information in the transcript to decide.";

/// The mock rule on its own, usable without a client.
std::string mock_llm(const PromptPair& prompts);

}  // namespace glt::inference
