#include "glt/vision.hpp"

#include <cstdio>
#include <regex>
#include <set>

#include "glt/digest.hpp"
#include "glt/error.hpp"

namespace glt::inference {

VisionChatRequest HttpVisionModel::build_request(const media::FrameRecord& frame, const PromptPair& prompts,
                                                 const DecodingConfig& decoding) const {
  VisionChatRequest request;
  request.system = prompts.system;
  request.user = prompts.user;
  request.decoding = decoding;
  request.model_id = client_.config().model_id;
  request.image = {"image/png", media::encode_png(frame.image)};
  return request;
}

std::string HttpVisionModel::caption(const media::FrameRecord& frame, const PromptPair& prompts,
                                     const DecodingConfig& decoding) const {
  return client_.send(build_request(frame, prompts, decoding)).text;
}

namespace {

constexpr std::string_view kTagMagic = "GLTM";

std::uint32_t hash32(const media::Raster& raster) { return static_cast<std::uint32_t>(fnv1a64(raster.rgb) >> 32); }

std::string hex8(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

}  // namespace

std::string hash8(const media::Raster& raster) { return hex8(hash32(raster)); }

std::string mock_vlm(const media::FrameRecord& frame, const PromptPair& prompts) {
  static const std::regex label(R"(Cell(\d+)\(([^,()]+), ([^()]+)\))");
  const auto tag = read_text_tag(frame.image);
  const auto h = hash32(frame.image);

  std::string out;
  if (prompts.system) {
    std::set<int> seen;
    const auto& system = *prompts.system;
    for (std::sregex_iterator it(system.begin(), system.end(), label), end; it != end; ++it) {
      const int k = std::stoi((*it)[1].str());
      if (!seen.insert(k).second) continue;
      if (!out.empty()) out += "\n";
      out += (*it)[0].str() + ": token " + hex8(h + static_cast<std::uint32_t>(k));
    }
    if (!out.empty()) {
      if (tag) out += "\ntext: " + *tag;
      return out;
    }
  }
  out = "global: frame " + std::to_string(frame.index) + " " + hex8(h);
  if (tag) out += " text: " + *tag;
  return out;
}

std::string MockVlm::caption(const media::FrameRecord& frame, const PromptPair& prompts,
                             const DecodingConfig& decoding) const {
  if (prompts.user.empty()) throw Error(ErrorKind::InvalidRequest, "empty user message");
  decoding.validate();
  calls_.fetch_add(1);
  return mock_vlm(frame, prompts);
}

void embed_text_tag(media::Raster& raster, std::string_view text) {
  if (text.size() > 255) throw Error(ErrorKind::InvalidRequest, "text tag longer than 255 bytes");
  for (char c : text) {
    if (c < 0x20 || c > 0x7e) throw Error(ErrorKind::InvalidRequest, "text tag must be printable ASCII");
  }
  std::string bytes(kTagMagic);
  bytes += static_cast<char>(text.size());
  bytes += text;
  const auto pixels = (bytes.size() + 2) / 3;
  if (raster.height < 1 || pixels > static_cast<std::size_t>(raster.width)) {
    throw Error(ErrorKind::InvalidRequest, "text tag does not fit in the first row");
  }
  bytes.resize(pixels * 3, '\0');
  std::copy(bytes.begin(), bytes.end(), raster.rgb.begin());
}

std::optional<std::string> read_text_tag(const media::Raster& raster) {
  const auto row = static_cast<std::size_t>(raster.width) * 3;
  if (raster.height < 1 || row < kTagMagic.size() + 1) return std::nullopt;
  const std::string_view bytes(reinterpret_cast<const char*>(raster.rgb.data()), row);
  if (bytes.substr(0, kTagMagic.size()) != kTagMagic) return std::nullopt;
  const auto len = static_cast<std::uint8_t>(bytes[kTagMagic.size()]);
  if (kTagMagic.size() + 1 + len > row) return std::nullopt;
  std::string text(bytes.substr(kTagMagic.size() + 1, len));
  for (char c : text) {
    if (c < 0x20 || c > 0x7e) return std::nullopt;
  }
  return text;
}

}  // namespace glt::inference
