#include <doctest.h>

#include <sstream>

#include "glt/cli.hpp"
#include "glt/digest.hpp"
#include "glt/transcript.hpp"
#include "http_fixture.hpp"
#include "mock_dataset.hpp"
#include "test_support.hpp"

using namespace glt;
using namespace glt::testing;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run glt_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

/// Frame directory for one video plus a dataset around it.
struct Fixture {
  TempDir dir;
  std::filesystem::path dataset;
  Fixture() { dataset = write_mock_dataset(dir.path(), 2, 3, 3); }
  std::string video(int i) const { return (dir.path() / "videos" / ("vid" + std::to_string(i))).string(); }
  std::string cache() const { return (dir / "cache").string(); }
};

}  // namespace

TEST_CASE("usage errors") {
  CHECK(glt_cli({}).code == cli::kConfigError);
  CHECK(glt_cli({"frobnicate"}).code == cli::kConfigError);
  CHECK(glt_cli({"ask", "x.glt.jsonl"}).code == cli::kConfigError);  // -q and --options are required
  const auto help = glt_cli({"--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("transcribe") != std::string::npos);
  CHECK(help.out.find("serve-qa") != std::string::npos);
}

TEST_CASE("transcribe writes a transcript and a manifest") {
  Fixture f;
  const auto out_path = (f.dir / "t.glt.jsonl").string();
  const auto r = glt_cli({"--mock", "--json", "transcribe", f.video(0), "-o", out_path});
  REQUIRE(r.code == cli::kOk);
  const auto m = json::parse(r.out);
  CHECK(m["transcript_id"] == content_digest(slurp(out_path)));
  CHECK(m["entry_count"] == 3);
  CHECK(m["mode"] == "local+global");
  CHECK(m["grid"] == "2x3");
  CHECK(m["config"]["vlm"]["model"] == "mock-vlm");
  CHECK(m["config"]["mock"] == true);
  const auto t = transcript::load(out_path);
  CHECK(t.has_global());
  CHECK(t.has_local());

  const auto plain = glt_cli({"--mock", "transcribe", f.video(0), "-o", out_path});
  CHECK(plain.out.rfind("wrote ", 0) == 0);
}

TEST_CASE("flags after the subcommand and mode selection") {
  Fixture f;
  const auto out_path = (f.dir / "g.glt.jsonl").string();
  const auto r = glt_cli({"transcribe", f.video(1), "-o", out_path, "--mock", "--mode", "global", "--grid", "3x3"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.err.find("warning: --grid is ignored in global mode") != std::string::npos);
  const auto t = transcript::load(out_path);
  CHECK(t.has_global());
  CHECK_FALSE(t.has_local());
  CHECK_FALSE(t.header.grid.has_value());

  const auto local = glt_cli({"--mock", "--mode", "local", "--grid", "1x2", "transcribe", f.video(1), "-o", out_path});
  REQUIRE(local.code == cli::kOk);
  const auto tl = transcript::load(out_path);
  CHECK_FALSE(tl.has_global());
  REQUIRE(tl.header.grid.has_value());
  CHECK(tl.header.grid->cols == 2);
}

TEST_CASE("config errors exit 2 with the field name") {
  Fixture f;
  const auto r = glt_cli({"--mock", "--grid", "0x3", "transcribe", f.video(0)});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("grid.rows must be >= 1") != std::string::npos);
  CHECK(glt_cli({"--mock", "--mode", "sideways", "transcribe", f.video(0)}).code == cli::kConfigError);
  CHECK(glt_cli({"--mock", "--fps", "0", "transcribe", f.video(0)}).code == cli::kConfigError);
  CHECK(glt_cli({"--config", (f.dir / "nope.json").string(), "transcribe", f.video(0)}).code == cli::kConfigError);
}

TEST_CASE("media errors exit 4") {
  Fixture f;
  const auto missing = glt_cli({"--mock", "transcribe", (f.dir / "missing.mp4").string()});
  CHECK(missing.code == cli::kDecodeError);
  CHECK(missing.err.find("missing.mp4") != std::string::npos);

  spit(f.dir / "clip.mp4", "3");
  const auto no_decoder =
      glt_cli({"--mock", "--decoder", "/nonexistent/ffmpeg -i {input}", "transcribe", (f.dir / "clip.mp4").string()});
  CHECK(no_decoder.code == cli::kDecodeError);

  const auto decoder = write_fake_decoder(f.dir.path());
  const auto out_path = (f.dir / "clip.glt.jsonl").string();
  const auto ok = glt_cli({"--mock", "--decoder", decoder.string() + " {input} {fps} {outdir}", "transcribe",
                           (f.dir / "clip.mp4").string(), "-o", out_path});
  CHECK(ok.code == cli::kOk);
  CHECK(transcript::load(out_path).entries.size() == 3);
}

TEST_CASE("ask answers from a transcript") {
  Fixture f;
  const auto path = (f.dir / "t.glt.jsonl").string();
  REQUIRE(glt_cli({"--mock", "transcribe", f.video(0), "-o", path}).code == cli::kOk);
  const auto ds = json::parse(slurp(f.dataset));
  const auto& item = ds["items"][0];
  const int gold = item["gold_index"];

  const auto r = glt_cli({"--mock", "ask", path, "-q", item["question"], "--options", "w,x,y,z"});
  REQUIRE(r.code == cli::kOk);
  const std::string letter(1, static_cast<char>('A' + gold));
  CHECK(r.out.rfind(letter + ". ", 0) == 0);
  CHECK(r.out.find("(strict)") != std::string::npos);

  const auto j = json::parse(glt_cli({"--mock", "--json", "ask", path, "-q", item["question"], "--options", "w,x,y,z"}).out);
  CHECK(j["chosen_index"] == gold);
  CHECK(j["config"]["llm"]["model"] == "mock-llm");

  const auto abstain = glt_cli({"--mock", "ask", path, "-q", "no key here", "--options", "w,x"});
  CHECK(abstain.out.rfind("ABSTAIN", 0) == 0);

  const auto one = glt_cli({"--mock", "ask", path, "-q", "q", "--options", "only"});
  CHECK(one.code == cli::kConfigError);
  const auto six = glt_cli({"--mock", "ask", path, "-q", "q", "--options", "a,b,c,d,e,f"});
  CHECK(six.code == cli::kConfigError);
}

TEST_CASE("ask reports an unreachable model with exit 3") {
  Fixture f;
  const auto path = (f.dir / "t.glt.jsonl").string();
  REQUIRE(glt_cli({"--mock", "transcribe", f.video(0), "-o", path}).code == cli::kOk);
  LocalServer s;
  s.start();
  const auto url = s.url();
  s.stop();
  const auto r =
      glt_cli({"--llm-url", url, "--retries", "0", "--timeout", "2", "ask", path, "-q", "q", "--options", "a,b"});
  CHECK(r.code == cli::kInferenceError);
  CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("eval runs a benchmark and writes artifacts") {
  Fixture f;
  const auto out_dir = f.dir / "run";
  const auto r = glt_cli({"--mock", "--cache-dir", f.cache(), "eval", f.dataset.string(), "-o", out_dir.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("Avg. Acc") != std::string::npos);
  CHECK(r.out.find("100.00") != std::string::npos);
  for (const char* name : {"report.json", "report.txt", "predictions.jsonl", "transcripts/vid0.glt.jsonl"}) {
    CHECK(std::filesystem::exists(out_dir / name));
  }
  const auto report = json::parse(slurp(out_dir / "report.json"));
  CHECK(report["overall_accuracy"] == 1.0);
  CHECK(report["scenario"] == "local+global");

  const auto j = json::parse(
      glt_cli({"--mock", "--json", "--cache-dir", f.cache(), "eval", f.dataset.string(), "-o", out_dir.string()}).out);
  CHECK(j["provenance"]["cache_hits"] == 2);
  CHECK(j["config_fingerprint"] == report["config_fingerprint"]);
}

TEST_CASE("eval exits 1 when a video fails") {
  Fixture f;
  std::filesystem::remove(f.dir.path() / "videos" / "vid1" / "000001.png");
  const auto r = glt_cli({"--mock", "--cache-dir", f.cache(), "eval", f.dataset.string(), "-o", (f.dir / "run").string()});
  CHECK(r.code == cli::kFailure);
  CHECK(r.err.find("failed: vid1") != std::string::npos);
  CHECK(std::filesystem::exists(f.dir / "run" / "report.json"));
}
