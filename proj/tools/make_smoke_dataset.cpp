// Generates the bundled synthetic benchmark: frame-directory "videos" whose
// pixels carry GOLD markers the mock vision model reads back, plus a
// canonical dataset file whose gold answers match those markers.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <random>

#include "glt/media.hpp"
#include "glt/vision.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic smoke dataset"};
  std::string out_dir = "data/smoke";
  int videos = 10, questions_per_video = 5, frames_per_video = 5, width = 96, height = 64;
  std::uint32_t seed = 20240917;
  app.add_option("-o,--out", out_dir);
  app.add_option("--videos", videos);
  app.add_option("--questions", questions_per_video);
  app.add_option("--frames", frames_per_video);
  app.add_option("--width", width);
  app.add_option("--height", height);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  using glt::media::FrameRecord;
  using glt::media::Raster;

  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> channel(40, 230);
  const std::vector<std::string> categories{"causal", "temporal", "descriptive"};
  static const char* kColors[] = {"red", "green", "blue", "yellow", "purple"};

  nlohmann::ordered_json dataset;
  dataset["name"] = "smoke";
  dataset["items"] = nlohmann::ordered_json::array();

  for (int v = 0; v < videos; ++v) {
    char vid[16];
    std::snprintf(vid, sizeof vid, "v%02d", v);
    glt::media::FrameSequence seq;
    seq.source_id = vid;
    seq.fps = glt::Rational(1);
    for (int f = 0; f < frames_per_video; ++f) {
      FrameRecord rec;
      rec.index = f;
      rec.timestamp_s = f;
      rec.image = Raster(width, height, {static_cast<std::uint8_t>(channel(rng)), static_cast<std::uint8_t>(channel(rng)),
                                         static_cast<std::uint8_t>(channel(rng))});
      // a square that moves across the frames
      const int x0 = (f * width) / std::max(frames_per_video, 1);
      for (int y = height / 3; y < height / 3 + 12 && y < height; ++y) {
        for (int x = x0; x < x0 + 12 && x < width; ++x) rec.image.set(x, y, {250, 20, 20});
      }
      seq.frames.push_back(std::move(rec));
    }

    for (int q = 0; q < questions_per_video; ++q) {
      char qid[32];
      std::snprintf(qid, sizeof qid, "q%02d%d", v, q);
      const int gold = static_cast<int>(rng() % 5);
      const int frame = q % frames_per_video;
      glt::inference::embed_text_tag(seq.frames[frame].image,
                                     std::string("GOLD[") + qid + "]=" + static_cast<char>('A' + gold));

      nlohmann::ordered_json item;
      item["question_id"] = qid;
      item["video_id"] = vid;
      item["category"] = categories[static_cast<std::size_t>(q) % categories.size()];
      item["question"] = std::string("[") + qid + "] What colour is the marker shown in frame " +
                         std::to_string(frame) + "?";
      item["options"] = nlohmann::ordered_json::array();
      for (const auto* c : kColors) item["options"].push_back(c);
      item["gold_index"] = gold;
      dataset["items"].push_back(std::move(item));
    }
    glt::media::dump_frames(seq, fs::path(out_dir) / "videos" / vid);
  }

  std::ofstream out(fs::path(out_dir) / "dataset.json", std::ios::trunc);
  out << dataset.dump(2) << "\n";
  std::cout << "wrote " << videos << " videos and " << videos * questions_per_video << " questions to " << out_dir
            << "\n";
  return out ? 0 : 1;
}
