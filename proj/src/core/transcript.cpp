#include "glt/transcript.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "glt/error.hpp"

namespace glt::transcript {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

bool Transcript::has_global() const noexcept {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.global_caption.has_value(); });
}

bool Transcript::has_local() const noexcept {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.local_caption.has_value(); });
}

void Transcript::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.frame_index < 0) throw Error(ErrorKind::CorruptRecord, "negative frame_index");
    if (i > 0 && e.frame_index <= entries[i - 1].frame_index) {
      throw Error(ErrorKind::CorruptRecord, "entries not strictly sorted at frame " + std::to_string(e.frame_index));
    }
    if (!e.global_caption && !e.local_caption) {
      throw Error(ErrorKind::CorruptRecord, "frame " + std::to_string(e.frame_index) + " has no caption");
    }
    if (std::abs(e.timestamp_s - timestamp_for(e.frame_index, header.fps)) > 1e-6) {
      throw Error(ErrorKind::CorruptRecord, "frame " + std::to_string(e.frame_index) + " timestamp disagrees with fps");
    }
  }
  if (has_local() != header.grid.has_value()) {
    throw Error(ErrorKind::CorruptRecord, "grid must be present exactly when local captions exist");
  }
}

namespace {

std::vector<TranscriptEntry> skeleton(const std::vector<FrameMeta>& frames) {
  std::vector<TranscriptEntry> entries;
  entries.reserve(frames.size());
  for (const auto& f : frames) entries.push_back({f.index, f.timestamp_s, std::nullopt, std::nullopt});
  return entries;
}

void check_length(std::size_t captions, std::size_t frames, std::string_view what) {
  if (captions != frames) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(captions) + " " + std::string(what) + " caption(s) for " +
                                               std::to_string(frames) + " frame(s)");
  }
}

Transcript finish(TranscriptHeader header, std::vector<TranscriptEntry> entries) {
  Transcript t{std::move(header), std::move(entries)};
  t.validate();
  return t;
}

}  // namespace

Transcript ensemble(const std::vector<std::string>& globals, const std::vector<std::string>& locals,
                    const std::vector<FrameMeta>& frames, TranscriptHeader header) {
  check_length(globals.size(), frames.size(), "global");
  check_length(locals.size(), frames.size(), "local");
  auto entries = skeleton(frames);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].global_caption = globals[i];
    entries[i].local_caption = locals[i];
  }
  if (entries.empty()) header.grid.reset();
  return finish(std::move(header), std::move(entries));
}

Transcript ensemble_global_only(const std::vector<std::string>& globals, const std::vector<FrameMeta>& frames,
                                TranscriptHeader header) {
  check_length(globals.size(), frames.size(), "global");
  auto entries = skeleton(frames);
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].global_caption = globals[i];
  header.grid.reset();
  return finish(std::move(header), std::move(entries));
}

Transcript ensemble_local_only(const std::vector<std::string>& locals, const std::vector<FrameMeta>& frames,
                               TranscriptHeader header) {
  check_length(locals.size(), frames.size(), "local");
  auto entries = skeleton(frames);
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].local_caption = locals[i];
  if (entries.empty()) header.grid.reset();
  return finish(std::move(header), std::move(entries));
}

std::string format_timestamp(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

std::string render_text(const Transcript& t) {
  if (t.entries.empty()) throw Error(ErrorKind::EmptyTranscript, "transcript has no entries");
  std::string out;
  for (const auto& e : t.entries) {
    if (!out.empty()) out += "\n\n";
    out += "Frame " + std::to_string(e.frame_index) + " (t=" + format_timestamp(e.timestamp_s) + "s):";
    if (e.global_caption) out += "\n" + *e.global_caption;
    if (e.local_caption) out += "\n" + *e.local_caption;
  }
  return out;
}

namespace {

ordered_json grid_to_json(const std::optional<GridSpec>& grid) {
  if (!grid) return nullptr;
  return {{"rows", grid->rows},
          {"cols", grid->cols},
          {"line_color", {grid->line_color[0], grid->line_color[1], grid->line_color[2]}},
          {"line_thickness_px", grid->line_thickness_px}};
}

ordered_json fps_to_json(const Rational& fps) {
  if (fps.is_integer()) return fps.num();
  return fps.to_string();
}

Rational fps_from_json(const json& j) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  throw Error(ErrorKind::CorruptRecord, "fps must be an integer or a 'num/den' string");
}

void require_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorKind::CorruptRecord, std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::CorruptRecord, std::string(where) + ": unexpected field '" + key + "'");
    }
  }
}

std::optional<std::string> optional_text(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::string serialize(const Transcript& t) {
  const auto& h = t.header;
  ordered_json header;
  header["schema_version"] = kSchemaVersion;
  header["source_id"] = h.source_id;
  header["fps"] = fps_to_json(h.fps);
  header["entry_count"] = t.entries.size();
  header["grid"] = grid_to_json(h.grid);
  header["provenance"] = {{"vlm_model", h.provenance.vlm_model},
                          {"decoding", h.provenance.decoding.to_json()},
                          {"prompt_digest", h.provenance.prompt_digest},
                          {"created_at", h.provenance.created_at}};
  std::string out = header.dump() + "\n";
  for (const auto& e : t.entries) {
    ordered_json rec;
    rec["frame_index"] = e.frame_index;
    rec["timestamp_s"] = e.timestamp_s;
    rec["global_caption"] = e.global_caption ? ordered_json(*e.global_caption) : ordered_json(nullptr);
    rec["local_caption"] = e.local_caption ? ordered_json(*e.local_caption) : ordered_json(nullptr);
    out += rec.dump() + "\n";
  }
  return out;
}

Transcript parse(std::string_view jsonl) {
  std::vector<std::string_view> lines;
  while (!jsonl.empty()) {
    const auto nl = jsonl.find('\n');
    const auto line = jsonl.substr(0, nl);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    jsonl.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw Error(ErrorKind::CorruptRecord, "empty transcript file");

  Transcript t;
  std::size_t entry_count = 0;
  try {
    const auto header = json::parse(lines[0]);
    if (!header.is_object() || !header.contains("schema_version")) {
      throw Error(ErrorKind::CorruptRecord, "header record missing schema_version");
    }
    if (header.at("schema_version") != kSchemaVersion) {
      throw Error(ErrorKind::SchemaVersionMismatch,
                  "schema_version " + header.at("schema_version").dump() + ", expected " + std::to_string(kSchemaVersion));
    }
    require_keys(header, {"schema_version", "source_id", "fps", "entry_count", "grid", "provenance"}, "header");
    t.header.source_id = header.at("source_id").get<std::string>();
    t.header.fps = fps_from_json(header.at("fps"));
    entry_count = header.at("entry_count").get<std::size_t>();
    if (const auto& g = header.at("grid"); !g.is_null()) {
      require_keys(g, {"rows", "cols", "line_color", "line_thickness_px"}, "grid");
      GridSpec grid;
      grid.rows = g.at("rows").get<int>();
      grid.cols = g.at("cols").get<int>();
      grid.line_color = g.at("line_color").get<Rgb>();
      grid.line_thickness_px = g.at("line_thickness_px").get<int>();
      grid.validate();
      t.header.grid = grid;
    }
    const auto& p = header.at("provenance");
    require_keys(p, {"vlm_model", "decoding", "prompt_digest", "created_at"}, "provenance");
    t.header.provenance.vlm_model = p.at("vlm_model").get<std::string>();
    t.header.provenance.decoding = inference::DecodingConfig::from_json(p.at("decoding"), {});
    t.header.provenance.prompt_digest = p.at("prompt_digest").get<std::string>();
    t.header.provenance.created_at = p.at("created_at").get<std::string>();

    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto rec = json::parse(lines[i]);
      require_keys(rec, {"frame_index", "timestamp_s", "global_caption", "local_caption"},
                   "entry " + std::to_string(i - 1));
      TranscriptEntry e;
      e.frame_index = rec.at("frame_index").get<std::int64_t>();
      e.timestamp_s = rec.at("timestamp_s").get<double>();
      e.global_caption = optional_text(rec, "global_caption");
      e.local_caption = optional_text(rec, "local_caption");
      t.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptRecord, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaVersionMismatch || e.kind() == ErrorKind::CorruptRecord) throw;
    throw Error(ErrorKind::CorruptRecord, e.what());
  }
  if (t.entries.size() != entry_count) {
    throw Error(ErrorKind::CorruptRecord, "header declares " + std::to_string(entry_count) + " entries, found " +
                                              std::to_string(t.entries.size()));
  }
  t.validate();
  return t;
}

void save(const Transcript& t, const fs::path& path) {
  const auto body = serialize(t);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(std::hash<std::string>{}(body) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IoError, "cannot rename into " + path.string());
  }
}

Transcript load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  const std::string body{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse(body);
}

TranscriptBuilder::TranscriptBuilder(std::vector<FrameMeta> frames, TranscriptHeader header, bool want_global,
                                     bool want_local)
    : frames_(std::move(frames)),
      header_(std::move(header)),
      want_global_(want_global),
      want_local_(want_local),
      globals_(frames_.size()),
      locals_(frames_.size()) {}

void TranscriptBuilder::set_global(std::size_t position, std::string caption) {
  std::lock_guard lock(mu_);
  globals_.at(position) = std::move(caption);
}

void TranscriptBuilder::set_local(std::size_t position, std::string caption) {
  std::lock_guard lock(mu_);
  locals_.at(position) = std::move(caption);
}

bool TranscriptBuilder::complete() const {
  std::lock_guard lock(mu_);
  const auto filled = [](const auto& v) { return std::all_of(v.begin(), v.end(), [](const auto& c) { return c.has_value(); }); };
  return (!want_global_ || filled(globals_)) && (!want_local_ || filled(locals_));
}

Transcript TranscriptBuilder::finalize() const {
  if (!complete()) throw Error(ErrorKind::IncompleteTranscript, "captions still pending");
  std::lock_guard lock(mu_);
  std::vector<std::string> g;
  std::vector<std::string> l;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (want_global_) g.push_back(*globals_[i]);
    if (want_local_) l.push_back(*locals_[i]);
  }
  if (want_global_ && want_local_) return ensemble(g, l, frames_, header_);
  if (want_local_) return ensemble_local_only(l, frames_, header_);
  return ensemble_global_only(g, frames_, header_);
}

}  // namespace glt::transcript
