#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace glt::gateway {

/// Rule-set version reported with every verdict.
inline constexpr std::string_view kPrivacyRulesVersion = "privacy-gate/1";

// Rule ids.
inline constexpr std::string_view kRuleImageDataUri = "image-data-uri";      // (a)
inline constexpr std::string_view kRuleImageMagic = "image-magic-bytes";     // (b)
inline constexpr std::string_view kRuleBase64Image = "base64-image";         // (c)
inline constexpr std::string_view kRuleImageField = "image-field";           // (d)

struct Violation {
  std::string path;  // "$" for the raw body, a JSON pointer (prefixed "line N:" for JSONL) otherwise
  std::string rule_id;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct PrivacyVerdict {
  bool ok = true;
  std::vector<Violation> violations;
};

/// Inspects an outbound body for image content:
///  (a) `data:image/<type>[;...];base64,<payload>` whose payload (16+ chars) decodes to
///      an image signature, or any such payload when <type> has no checked signature,
///  (b) PNG/JPEG/GIF/BMP/WebP signatures anywhere in the bytes,
///  (c) base64 runs whose decoded prefix is one of those signatures,
///  (d) keys named image/images/image_url/pixels/frame_data in JSON or JSONL bodies.
/// JSON string values are also checked after unescaping. Heuristic; a caption
/// that merely mentions "data:image" passes unless real image data follows.
PrivacyVerdict privacy_gate(std::string_view body, std::string_view content_type);

}  // namespace glt::gateway
