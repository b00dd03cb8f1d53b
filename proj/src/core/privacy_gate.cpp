#include "glt/privacy_gate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <nlohmann/json.hpp>

#include "glt/digest.hpp"

namespace glt::gateway {
namespace {

using nlohmann::json;

bool starts_with_image_magic(std::string_view b) {
  const auto has = [&](std::string_view sig, std::size_t at = 0) {
    return b.size() >= at + sig.size() && b.substr(at, sig.size()) == sig;
  };
  if (has(std::string_view("\x89PNG\r\n\x1a\n", 8))) return true;
  if (has(std::string_view("\xFF\xD8\xFF", 3))) return true;
  if (has("GIF87a") || has("GIF89a")) return true;
  if (has("BM") && b.size() >= 10 && b.substr(6, 4) == std::string_view("\0\0\0\0", 4)) return true;
  // the size field of a real file is never four printable ASCII bytes (that would be > 538 MB)
  if (has("RIFF") && has("WEBP", 8) &&
      !std::all_of(b.begin() + 4, b.begin() + 8, [](char c) { return c >= 0x20 && c <= 0x7E; })) {
    return true;
  }
  return false;
}

bool contains_image_magic(std::string_view bytes) {
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const char c = bytes[i];
    if (c == '\x89' || c == '\xFF' || c == 'G' || c == 'B' || c == 'R') {
      if (starts_with_image_magic(bytes.substr(i))) return true;
    }
  }
  return false;
}

bool is_b64(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '+' || c == '/' || c == '-' || c == '_';
}

/// Decodes up to 16 characters of `run` (whole quanta only) into bytes.
std::optional<std::string> decode_prefix(std::string_view run) {
  std::string chunk(run.substr(0, std::min<std::size_t>(16, run.size() / 4 * 4)));
  if (chunk.empty()) return std::nullopt;
  for (auto& c : chunk) {
    if (c == '-') c = '+';
    if (c == '_') c = '/';
  }
  return base64_decode(chunk);
}

// First base64 character of each signature's encoding: 0x89 -> 'i', 0xFF -> '/'
// (or '_' URL-safe), 'G' -> 'R', 'B' -> 'Q', 'R' -> 'U'.
bool may_start_signature(char c) { return c == 'i' || c == '/' || c == '_' || c == 'R' || c == 'Q' || c == 'U'; }

bool decodes_to_image(std::string_view run) {
  for (std::size_t off = 0; off + 4 <= run.size(); ++off) {
    if (!may_start_signature(run[off])) continue;
    if (auto decoded = decode_prefix(run.substr(off)); decoded && starts_with_image_magic(*decoded)) return true;
  }
  return false;
}

bool contains_base64_image(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_b64(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_b64(text[j])) ++j;
    if (decodes_to_image(text.substr(i, j - i))) return true;
    i = j;
  }
  return false;
}

bool icase_equal(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return std::tolower(x) == std::tolower(y); });
}

// Subtypes whose payload can be checked against a signature.
bool verifiable_subtype(std::string_view params) {
  const auto subtype = params.substr(0, params.find(';'));
  for (std::string_view s : {"png", "jpeg", "jpg", "pjpeg", "gif", "bmp", "x-ms-bmp", "webp"}) {
    if (icase_equal(subtype, s)) return true;
  }
  return false;
}

// data:image/<subtype>[;params];base64,<payload>. A payload of 16+ base64
// characters counts when it decodes to an image signature, or always when the
// subtype has no signature we check (svg, tiff, avif, ...).
bool contains_image_data_uri(std::string_view text) {
  constexpr std::string_view kPrefix = "data:image/";
  for (std::size_t i = 0; i + kPrefix.size() <= text.size(); ++i) {
    if (!icase_equal(text.substr(i, kPrefix.size()), kPrefix)) continue;
    const auto comma = text.find(',', i + kPrefix.size());
    if (comma == std::string_view::npos) return false;
    const auto params = text.substr(i + kPrefix.size(), comma - i - kPrefix.size());
    // media type and parameters contain no whitespace
    if (params.empty() || std::any_of(params.begin(), params.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    if (params.size() < 7 || !icase_equal(params.substr(params.size() - 7), ";base64")) continue;
    std::size_t end = comma + 1;
    while (end < text.size() && (is_b64(text[end]) || text[end] == '=')) ++end;
    const auto payload = text.substr(comma + 1, end - comma - 1);
    if (payload.size() < 16 || !decode_prefix(payload)) continue;
    if (!verifiable_subtype(params) || decodes_to_image(payload)) return true;
  }
  return false;
}

/// Latin-1 projection of UTF-8 text so that "\u0089PNG" in JSON is seen as the byte 0x89.
std::string latin1_projection(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) {
    const auto c = static_cast<unsigned char>(utf8[i]);
    if (c < 0x80) {
      out += static_cast<char>(c);
      ++i;
    } else if ((c & 0xE0) == 0xC0 && i + 1 < utf8.size()) {
      const unsigned cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(utf8[i + 1]) & 0x3Fu);
      out += cp <= 0xFF ? static_cast<char>(cp) : '?';
      i += 2;
    } else {
      out += '?';
      ++i;
      while (i < utf8.size() && (static_cast<unsigned char>(utf8[i]) & 0xC0) == 0x80) ++i;
    }
  }
  return out;
}

class Collector {
 public:
  void add(std::string path, std::string_view rule) {
    Violation v{std::move(path), std::string(rule)};
    if (std::find(out_.begin(), out_.end(), v) == out_.end()) out_.push_back(std::move(v));
  }

  void scan_text(std::string_view text, const std::string& path) {
    if (contains_image_data_uri(text)) add(path, kRuleImageDataUri);
    if (contains_image_magic(text)) add(path, kRuleImageMagic);
    if (contains_base64_image(text)) add(path, kRuleBase64Image);
  }

  void walk(const json& j, const std::string& path) {
    if (j.is_object()) {
      for (const auto& [key, value] : j.items()) {
        const auto child = path + "/" + key;
        for (std::string_view banned : {"image", "images", "image_url", "pixels", "frame_data"}) {
          if (icase_equal(key, banned)) add(child, kRuleImageField);
        }
        walk(value, child);
      }
    } else if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) walk(j[i], path + "/" + std::to_string(i));
    } else if (j.is_string()) {
      const auto& s = j.get_ref<const std::string&>();
      scan_text(s, path.empty() ? "/" : path);
      if (std::any_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) >= 0x80; })) {
        const auto projected = latin1_projection(s);
        if (contains_image_magic(projected)) add(path.empty() ? "/" : path, kRuleImageMagic);
      }
    }
  }

  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

bool looks_structured(std::string_view content_type, std::string_view body) {
  std::string ct(content_type);
  std::transform(ct.begin(), ct.end(), ct.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ct.find("json") != std::string::npos) return true;
  if (!ct.empty()) return false;
  const auto first = body.find_first_not_of(" \t\r\n");
  return first != std::string_view::npos && (body[first] == '{' || body[first] == '[');
}

}  // namespace

PrivacyVerdict privacy_gate(std::string_view body, std::string_view content_type) {
  Collector collector;
  collector.scan_text(body, "$");

  if (looks_structured(content_type, body)) {
    if (auto whole = json::parse(body, nullptr, false); !whole.is_discarded()) {
      collector.walk(whole, "");
    } else {
      std::size_t line_no = 0;
      std::size_t start = 0;
      while (start <= body.size()) {
        const auto nl = body.find('\n', start);
        const auto line = body.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line_no;
        if (auto rec = json::parse(line, nullptr, false); !rec.is_discarded()) {
          collector.walk(rec, "line " + std::to_string(line_no) + ":");
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
      }
    }
  }

  PrivacyVerdict verdict;
  verdict.violations = collector.take();
  verdict.ok = verdict.violations.empty();
  return verdict;
}

}  // namespace glt::gateway
