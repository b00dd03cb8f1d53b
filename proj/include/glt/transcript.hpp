#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glt/inference.hpp"
#include "glt/types.hpp"

namespace glt::transcript {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kFileSuffix = ".glt.jsonl";

struct FrameMeta {
  std::int64_t index = 0;
  double timestamp_s = 0.0;
};

struct TranscriptEntry {
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;
  std::optional<std::string> global_caption;
  std::optional<std::string> local_caption;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct Provenance {
  std::string vlm_model;
  inference::DecodingConfig decoding = inference::DecodingConfig::vision_default();
  std::string prompt_digest;
  std::string created_at;  // ISO-8601 UTC; the only time-dependent field

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TranscriptHeader {
  std::string source_id;
  Rational fps;
  std::optional<GridSpec> grid;  // present iff local captions exist
  Provenance provenance;

  friend bool operator==(const TranscriptHeader&, const TranscriptHeader&) = default;
};

/// Per-frame global and local captions for one video. Local and global
/// captions stay in separate fields; render_text does the textual join.
struct Transcript {
  TranscriptHeader header;
  std::vector<TranscriptEntry> entries;

  bool has_global() const noexcept;
  bool has_local() const noexcept;
  /// Throws CorruptRecord when an invariant is broken.
  void validate() const;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Element-wise pairing of global and local captions. Errors: LengthMismatch.
Transcript ensemble(const std::vector<std::string>& globals, const std::vector<std::string>& locals,
                    const std::vector<FrameMeta>& frames, TranscriptHeader header);
Transcript ensemble_global_only(const std::vector<std::string>& globals, const std::vector<FrameMeta>& frames,
                                TranscriptHeader header);
Transcript ensemble_local_only(const std::vector<std::string>& locals, const std::vector<FrameMeta>& frames,
                               TranscriptHeader header);

/// "0", "0.5", "1.333": seconds with at most three decimals, trailing zeros dropped.
std::string format_timestamp(double seconds);

/// Text for the transcript slot of the QA prompt. Errors: EmptyTranscript.
std::string render_text(const Transcript& t);

/// JSONL: a header record, then one record per entry.
std::string serialize(const Transcript& t);
/// Errors: SchemaVersionMismatch, CorruptRecord.
Transcript parse(std::string_view jsonl);
/// Writes via a temporary file and rename. Errors: IoError.
void save(const Transcript& t, const std::filesystem::path& path);
/// Errors: IoError, SchemaVersionMismatch, CorruptRecord.
Transcript load(const std::filesystem::path& path);

/// Collects captions that complete out of order (parallel inference) and
/// builds the Transcript once every requested caption is present.
class TranscriptBuilder {
 public:
  TranscriptBuilder(std::vector<FrameMeta> frames, TranscriptHeader header, bool want_global, bool want_local);

  /// Thread-safe. `position` is the 0-based position in `frames`.
  void set_global(std::size_t position, std::string caption);
  void set_local(std::size_t position, std::string caption);

  bool complete() const;
  /// Errors: IncompleteTranscript.
  Transcript finalize() const;

 private:
  std::vector<FrameMeta> frames_;
  TranscriptHeader header_;
  bool want_global_;
  bool want_local_;
  mutable std::mutex mu_;
  std::vector<std::optional<std::string>> globals_;
  std::vector<std::optional<std::string>> locals_;
};

}  // namespace glt::transcript
