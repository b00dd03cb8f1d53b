#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glt/types.hpp"

namespace glt::media {

/// Interleaved 8-bit RGB raster, row-major, origin top-left.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  Raster() = default;
  Raster(int w, int h, Rgb fill = {0, 0, 0});

  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
  Rgb at(int x, int y) const noexcept {
    const auto o = offset(x, y);
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const auto o = offset(x, y);
    rgb[o] = c[0];
    rgb[o + 1] = c[1];
    rgb[o + 2] = c[2];
  }

  friend bool operator==(const Raster&, const Raster&) = default;
};

struct FrameRecord {
  std::int64_t index = 0;
  double timestamp_s = 0.0;
  Raster image;

  int width() const noexcept { return image.width; }
  int height() const noexcept { return image.height; }
};

/// Frames sorted by index with no gaps; immutable once built.
struct FrameSequence {
  std::vector<FrameRecord> frames;
  Rational fps;
  std::string source_id;

  std::size_t size() const noexcept { return frames.size(); }
};

/// Command template for the external decoder. Placeholders: {input}, {fps},
/// {outdir}. The decoder must write `{outdir}/NNNNNN.png` numbered from 0.
struct DecoderConfig {
  std::string command_template =
      "ffmpeg -nostdin -loglevel error -i {input} -vf fps={fps} -start_number 0 {outdir}/%06d.png";
};

/// Samples `video_path` at `fps` through the external decoder.
/// Errors: DecoderNotFound, DecodeFailure, EmptyVideo.
FrameSequence extract_frames(const std::filesystem::path& video_path, const Rational& fps,
                             const DecoderConfig& decoder = {});

/// Loads pre-extracted frames named by zero-padded index (`000.png`, `000001.png`, ...).
/// A `frames.json` sidecar, when present, supplies source_id and (if `fps` is
/// not given) the sampling rate. Errors: EmptyVideo, MissingIndex, UnreadableImage.
FrameSequence load_frame_dir(const std::filesystem::path& dir, std::optional<Rational> fps = std::nullopt);

/// Writes `{index:06}.png` files plus the `frames.json` sidecar.
void dump_frames(const FrameSequence& seq, const std::filesystem::path& dir);

/// Centre coordinates of the interior grid lines along one axis:
/// round(k * extent / count) for k = 1..count-1, halves rounded up.
std::vector<int> grid_line_positions(int extent, int count);

/// Pixel span [first, last) covered by a line of `thickness` centred on `center`,
/// clipped to [0, extent).
std::pair<int, int> line_span(int center, int thickness, int extent) noexcept;

/// Returns a copy of `frame` with the grid marker drawn in; the input is untouched.
/// Errors: FrameTooSmall when width < cols or height < rows.
FrameRecord overlay_grid(const FrameRecord& frame, const GridSpec& grid);

// PNG codec (libpng). Only the edge side links this.
std::string encode_png(const Raster& raster);
Raster decode_png(std::span<const std::uint8_t> bytes);
Raster read_png(const std::filesystem::path& path);
void write_png(const Raster& raster, const std::filesystem::path& path);

}  // namespace glt::media
