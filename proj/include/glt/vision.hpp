#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <string_view>

#include "glt/inference.hpp"
#include "glt/media.hpp"

namespace glt::inference {

/// Vision-capable model used for transcription.
class VisionModel {
 public:
  virtual ~VisionModel() = default;
  virtual std::string caption(const media::FrameRecord& frame, const PromptPair& prompts,
                              const DecodingConfig& decoding) const = 0;
  virtual std::string model_id() const = 0;
};

/// Sends the frame as a PNG data URI at native resolution. A model-default
/// system prompt is sent as no system message at all.
class HttpVisionModel final : public VisionModel {
 public:
  explicit HttpVisionModel(EndpointConfig config) : client_(std::move(config)) {}
  std::string caption(const media::FrameRecord& frame, const PromptPair& prompts,
                      const DecodingConfig& decoding) const override;
  std::string model_id() const override { return client_.config().model_id; }

  VisionChatRequest build_request(const media::FrameRecord& frame, const PromptPair& prompts,
                                  const DecodingConfig& decoding) const;

 private:
  HttpChatClient client_;
};

/// First 8 hex digits of FNV-1a-64 over the RGB bytes.
std::string hash8(const media::Raster& raster);

/// Mock rule:
///  * global prompt -> "global: frame <index> <hash8>"
///  * grid prompt   -> one "CellK(<col>, <row>): token <hash8 + K>" line per cell
///    label listed in the system prompt (hex addition modulo 2^32)
/// If the frame carries a text tag (see embed_text_tag) the mock "reads" it:
/// global output gains " text: <tag>", grid output a final "text: <tag>" line.
std::string mock_vlm(const media::FrameRecord& frame, const PromptPair& prompts);

class MockVlm final : public VisionModel {
 public:
  std::string caption(const media::FrameRecord& frame, const PromptPair& prompts,
                      const DecodingConfig& decoding) const override;
  std::string model_id() const override { return "mock-vlm"; }
  std::int64_t calls() const noexcept { return calls_.load(); }

 private:
  mutable std::atomic<std::int64_t> calls_{0};
};

/// Writes "GLTM", a length byte and `text` into the top-left pixels of row 0,
/// three bytes per pixel. Text must be printable ASCII, at most 255 bytes, and
/// fit in the row. Errors: InvalidRequest.
void embed_text_tag(media::Raster& raster, std::string_view text);
std::optional<std::string> read_text_tag(const media::Raster& raster);

}  // namespace glt::inference
