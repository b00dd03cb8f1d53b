#include "glt/media.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "glt/error.hpp"

namespace glt::media {
namespace fs = std::filesystem;
using nlohmann::json;

Raster::Raster(int w, int h, Rgb fill) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill[0];
    rgb[i + 1] = fill[1];
    rgb[i + 2] = fill[2];
  }
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

bool is_executable(const fs::path& p) { return ::access(p.c_str(), X_OK) == 0 && fs::is_regular_file(p); }

bool program_exists(const std::string& program) {
  if (program.find('/') != std::string::npos) return is_executable(program);
  const char* path_env = std::getenv("PATH");
  if (path_env == nullptr) return false;
  std::stringstream ss(path_env);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (!dir.empty() && is_executable(fs::path(dir) / program)) return true;
  }
  return false;
}

/// RAII scratch directory under the system temp dir.
class ScratchDir {
 public:
  ScratchDir() {
    auto pattern = (fs::temp_directory_path() / "glt-decode-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) throw Error(ErrorKind::IoError, "mkdtemp failed");
    path_ = pattern;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::optional<std::int64_t> index_from_stem(const fs::path& file) {
  if (file.extension() != ".png") return std::nullopt;
  const auto stem = file.stem().string();
  if (stem.empty() || stem.size() > 12 || !std::all_of(stem.begin(), stem.end(), ::isdigit)) {
    return std::nullopt;
  }
  return std::stoll(stem);
}

}  // namespace

FrameSequence extract_frames(const fs::path& video_path, const Rational& fps, const DecoderConfig& decoder) {
  if (!fs::exists(video_path)) throw Error(ErrorKind::DecodeFailure, "no such file: " + video_path.string());
  std::istringstream tpl(decoder.command_template);
  std::string program;
  tpl >> program;
  if (program.empty() || !program_exists(program)) {
    throw Error(ErrorKind::DecoderNotFound, "decoder '" + program + "' not found on PATH");
  }

  ScratchDir scratch;
  std::string command = decoder.command_template;
  replace_all(command, "{input}", shell_quote(video_path.string()));
  replace_all(command, "{fps}", fps.to_string());
  replace_all(command, "{outdir}", shell_quote(scratch.path().string()));
  command += " </dev/null";

  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    if (code == 127) throw Error(ErrorKind::DecoderNotFound, "decoder command not runnable: " + program);
    throw Error(ErrorKind::DecodeFailure,
                video_path.string() + ": decoder exited with status " + std::to_string(code));
  }

  auto seq = load_frame_dir(scratch.path(), fps);
  seq.source_id = video_path.stem().string();
  return seq;
}

FrameSequence load_frame_dir(const fs::path& dir, std::optional<Rational> fps) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "not a directory: " + dir.string());

  FrameSequence seq;
  seq.source_id = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();

  const auto sidecar = dir / "frames.json";
  if (fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    const auto meta = json::parse(in, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) {
      throw Error(ErrorKind::UnreadableImage, "malformed sidecar " + sidecar.string());
    }
    if (meta.contains("source_id") && meta["source_id"].is_string()) seq.source_id = meta["source_id"];
    if (!fps && meta.contains("fps")) {
      const auto& f = meta["fps"];
      fps = f.is_string() ? Rational::parse(f.get<std::string>()) : Rational::parse(f.dump());
    }
  }
  seq.fps = fps.value_or(Rational(1));

  std::map<std::int64_t, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (auto idx = index_from_stem(entry.path())) {
      if (!files.emplace(*idx, entry.path()).second) {
        throw Error(ErrorKind::MissingIndex, "duplicate frame index " + std::to_string(*idx) + " in " + dir.string());
      }
    }
  }
  if (files.empty()) throw Error(ErrorKind::EmptyVideo, "no frames in " + dir.string());

  std::int64_t expected = 0;
  for (const auto& [idx, path] : files) {
    if (idx != expected) {
      throw Error(ErrorKind::MissingIndex,
                  "frame " + std::to_string(expected) + " missing in " + dir.string());
    }
    FrameRecord rec;
    rec.index = idx;
    rec.timestamp_s = timestamp_for(idx, seq.fps);
    rec.image = read_png(path);
    if (rec.image.width < 1 || rec.image.height < 1) {
      throw Error(ErrorKind::UnreadableImage, "empty raster " + path.string());
    }
    seq.frames.push_back(std::move(rec));
    ++expected;
  }
  return seq;
}

void dump_frames(const FrameSequence& seq, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& frame : seq.frames) {
    char name[32];
    std::snprintf(name, sizeof name, "%06lld.png", static_cast<long long>(frame.index));
    write_png(frame.image, dir / name);
  }
  json meta = {
      {"source_id", seq.source_id},
      {"count", seq.frames.size()},
      {"width", seq.frames.empty() ? 0 : seq.frames.front().width()},
      {"height", seq.frames.empty() ? 0 : seq.frames.front().height()},
  };
  if (seq.fps.is_integer()) {
    meta["fps"] = seq.fps.num();
  } else {
    meta["fps"] = seq.fps.to_string();
  }
  std::ofstream out(dir / "frames.json", std::ios::trunc);
  out << meta.dump(2) << "\n";
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir / "frames.json").string());
}

std::vector<int> grid_line_positions(int extent, int count) {
  std::vector<int> positions;
  if (count < 2) return positions;
  positions.reserve(static_cast<std::size_t>(count - 1));
  const auto e = static_cast<std::int64_t>(extent);
  for (std::int64_t k = 1; k < count; ++k) {
    // floor(k*e/count + 1/2) in exact integer arithmetic
    positions.push_back(static_cast<int>((2 * k * e + count) / (2 * static_cast<std::int64_t>(count))));
  }
  return positions;
}

std::pair<int, int> line_span(int center, int thickness, int extent) noexcept {
  const int first = center - thickness / 2;
  return {std::clamp(first, 0, extent), std::clamp(first + thickness, 0, extent)};
}

FrameRecord overlay_grid(const FrameRecord& frame, const GridSpec& grid) {
  grid.validate();
  if (frame.width() < grid.cols || frame.height() < grid.rows) {
    throw Error(ErrorKind::FrameTooSmall, std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                                              " frame cannot hold a " + grid.label() + " grid");
  }
  FrameRecord out = frame;
  auto& img = out.image;
  for (int x : grid_line_positions(img.width, grid.cols)) {
    const auto [lo, hi] = line_span(x, grid.line_thickness_px, img.width);
    for (int y = 0; y < img.height; ++y) {
      for (int xx = lo; xx < hi; ++xx) img.set(xx, y, grid.line_color);
    }
  }
  for (int y : grid_line_positions(img.height, grid.rows)) {
    const auto [lo, hi] = line_span(y, grid.line_thickness_px, img.height);
    for (int yy = lo; yy < hi; ++yy) {
      for (int x = 0; x < img.width; ++x) img.set(x, yy, grid.line_color);
    }
  }
  return out;
}

}  // namespace glt::media
