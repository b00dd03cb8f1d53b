#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glt/digest.hpp"
#include "glt/transcript.hpp"

namespace glt::testing {

struct Payload {
  std::string name;
  std::string body;
  std::string content_type;
};

// 1x1 images, base64.
inline constexpr const char* kPng1x1 =
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNkYPhfDwAChwGA60e6kgAAAABJRU5ErkJggg==";
inline constexpr const char* kGif1x1 = "R0lGODlhAQABAIAAAAAAAP///yH5BAEAAAAALAAAAAABAAEAAAIBRAA7";
inline constexpr const char* kJpegHead =
    "/9j/4AAQSkZJRgABAQEASABIAAD/2wBDAP//////////////////////////////////////////////////////////////////////////"
    "////////////wgALCAABAAEBAREA/8QAFBABAAAAAAAAAAAAAAAAAAAAAP/aAAgBAQABPxA=";
inline constexpr const char* kWebp1x1 = "UklGRhoAAABXRUJQVlA4TA0AAAAvAAAAEAcQERGIiP4HAA==";

inline std::string bytes(std::initializer_list<int> v) {
  std::string s;
  for (int b : v) s += static_cast<char>(b);
  return s;
}

inline std::string png_bytes() { return bytes({0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A, 0, 0, 0, 0x0D, 'I', 'H', 'D', 'R'}); }
inline std::string bmp_bytes() { return bytes({'B', 'M', 0x3A, 0, 0, 0, 0, 0, 0, 0, 0x36, 0, 0, 0, 0x28, 0}); }

inline std::string b64(const std::string& raw) {
  return base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

inline std::string url_safe(std::string s) {
  for (auto& c : s) {
    if (c == '+') c = '-';
    if (c == '/') c = '_';
  }
  return s;
}

inline std::string jsonl_line(const nlohmann::ordered_json& j) { return j.dump() + "\n"; }

/// Bodies that must never leave the edge.
inline std::vector<Payload> positive_payloads() {
  using nlohmann::ordered_json;
  const std::string png = png_bytes();
  const std::string cap = R"({"type":"frame","frame_index":0,"timestamp":"00:00:00","global_caption":")";
  std::vector<Payload> p;
  p.push_back({"raw png", png + "rest of file", "application/octet-stream"});
  p.push_back({"raw jpeg", bytes({0xFF, 0xD8, 0xFF, 0xE0, 0, 0x10}) + "JFIF", "application/octet-stream"});
  p.push_back({"raw gif87a", "GIF87a" + bytes({1, 0, 1, 0}), "application/octet-stream"});
  p.push_back({"raw gif89a", "GIF89a" + bytes({1, 0, 1, 0}), "application/octet-stream"});
  p.push_back({"raw bmp", bmp_bytes(), "application/octet-stream"});
  p.push_back({"raw webp", "RIFF" + bytes({0x1a, 0, 0, 0}) + "WEBPVP8L", "application/octet-stream"});
  p.push_back({"png inside text", "caption then " + png + " trailing", "text/plain"});
  p.push_back({"json escaped png", R"({"caption":"\u0089PNG\r\n\u001a\n\u0000\u0000"})", "application/json"});
  p.push_back({"data uri png", std::string("<img src=\"data:image/png;base64,") + kPng1x1 + "\">", "text/html"});
  p.push_back({"data uri jpeg", std::string("data:image/jpeg;base64,") + kJpegHead, "text/plain"});
  p.push_back({"data uri gif", std::string("data:image/gif;base64,") + kGif1x1, "text/plain"});
  p.push_back({"data uri svg", "data:image/svg+xml;base64,PHN2ZyB4bWxucz0iaHR0cDovL3d3dy53My5vcmcvMjAwMC9zdmciLz4=",
               "text/plain"});
  p.push_back({"data uri in json", ordered_json{{"caption", std::string("data:image/png;base64,") + kPng1x1}}.dump(),
               "application/json"});
  p.push_back({"bare png base64", std::string("frame: ") + kPng1x1, "text/plain"});
  p.push_back({"bare gif base64", std::string("x ") + kGif1x1, "text/plain"});
  p.push_back({"bare jpeg base64", kJpegHead, "text/plain"});
  p.push_back({"bare webp base64", kWebp1x1, "text/plain"});
  p.push_back({"bmp base64", "blob=" + b64(bmp_bytes()), "text/plain"});
  p.push_back({"url-safe jpeg base64", url_safe(kJpegHead), "text/plain"});
  p.push_back({"url-safe png base64", url_safe(b64(png + bytes({0xFF, 0xFF, 0xFF, 0xFB, 0xEF}))), "text/plain"});
  p.push_back({"offset 1 run", "A" + std::string(kPng1x1), "text/plain"});
  p.push_back({"offset 6 run", "prefix" + std::string(kPng1x1), "text/plain"});
  std::string escaped = R"({"caption":")";
  for (const char* c = kJpegHead; *c; ++c) escaped += *c == '/' ? std::string("\\/") : std::string(1, *c);
  p.push_back({"escaped slashes in json", escaped + "\"}", "application/json"});
  p.push_back({"caption holding base64", cap + kPng1x1 + R"(","local_caption":null})" + "\n", "application/x-ndjson"});
  p.push_back({"image field", ordered_json{{"question", "q"}, {"image", "x"}}.dump(), "application/json"});
  p.push_back({"images field", ordered_json{{"images", ordered_json::array()}}.dump(), "application/json"});
  p.push_back({"pixels field", ordered_json{{"meta", {{"Pixels", {1, 2, 3}}}}}.dump(), "application/json"});
  p.push_back({"frame_data field", ordered_json{{"frame_data", "00ff"}}.dump(), "application/json"});
  p.push_back({"image_url message",
               ordered_json{{"messages",
                             {{{"role", "user"},
                               {"content", {{{"type", "image_url"}, {"image_url", {{"url", "https://h/x.png"}}}}}}}}}}
                   .dump(),
               ""});
  p.push_back({"image field in jsonl",
               jsonl_line({{"type", "header"}}) + jsonl_line({{"type", "frame"}, {"image", "abc"}}), "application/x-ndjson"});
  return p;
}

inline std::string random_hex8(std::mt19937& rng) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rng()));
  return buf;
}

/// Caption text that talks about images without carrying any.
inline std::string random_caption(std::mt19937& rng) {
  static const std::vector<std::string> words = {
      "a",       "person",  "walks",    "toward",   "the",      "camera",  "holding", "PNG",     "JPEG",
      "GIF",     "image",   "frame",    "data:image", "RIFF",   "BMW",     "Bob",     "Rita",    "iPhone",
      "base64",  "shows",   "kitchen",  "red",      "cup",      "on",      "table",   "screen",  "reads",
      "WEBP",    "pixels",  "in",       "background", "Quick",  "Ubuntu",  "logo",    "/",       "image/png",
      "GIF?", "BM-7",    "data:image/png;base64", "i",     "R2-D2",   "U-turn",  "Qatar",   "child",
      "throws",  "ball",    "then",     "laughs",   "dog",      "runs",    "outside", "sign",    "says"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> len(4, 24);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    const auto roll = rng() % 20;
    if (roll == 0) {
      out += random_hex8(rng);
    } else if (roll == 1) {
      out += "Cell(" + std::to_string(rng() % 3 + 1) + ", " + std::to_string(rng() % 2 + 1) + "):";
    } else if (roll == 2) {
      // base64 of plain text
      out += "data:image/png;base64,SGVsbG8gV29ybGQhIFRoaXMgaXMgdGV4dC4=";
    } else {
      out += words[pick(rng)];
    }
  }
  return out;
}

/// Serialized transcripts with image-flavoured vocabulary and no image data.
inline std::vector<std::string> legit_transcripts(int count, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<std::string> out;
  for (int k = 0; k < count; ++k) {
    const int frames = 1 + static_cast<int>(rng() % 6);
    std::vector<transcript::FrameMeta> meta;
    std::vector<std::string> globals, locals;
    for (int i = 0; i < frames; ++i) {
      meta.push_back({i, static_cast<double>(i)});
      globals.push_back(random_caption(rng));
      locals.push_back(random_caption(rng) + "\n" + random_caption(rng));
    }
    transcript::TranscriptHeader header;
    header.source_id = "video" + std::to_string(k);
    header.fps = Rational(1);
    header.grid = GridSpec{};
    header.provenance.vlm_model = "mock-vlm";
    header.provenance.prompt_digest = content_digest("prompts" + std::to_string(k));
    header.provenance.created_at = "2024-09-17T00:00:00Z";
    out.push_back(transcript::serialize(transcript::ensemble(globals, locals, meta, header)));
  }
  return out;
}

}  // namespace glt::testing
