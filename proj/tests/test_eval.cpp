#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "glt/error.hpp"
#include "glt/eval.hpp"
#include "glt/pipeline.hpp"
#include "mock_dataset.hpp"
#include "test_support.hpp"

using namespace glt;
using namespace glt::eval;
using glt::testing::kind_of;
using glt::testing::TempDir;
using nlohmann::json;

namespace {

Dataset dataset_of(const std::vector<std::pair<std::string, int>>& category_gold) {
  Dataset ds;
  ds.name = "t";
  for (std::size_t i = 0; i < category_gold.size(); ++i) {
    ds.items.push_back({"q" + std::to_string(i), "v", category_gold[i].first, "?", {"a", "b", "c", "d", "e"},
                        category_gold[i].second});
  }
  return ds;
}

qa::Prediction pred(const std::string& id, std::optional<int> choice) {
  return {id, choice, "", choice ? qa::ExtractionMethod::Strict : qa::ExtractionMethod::Abstain};
}

// Independent tally: for each dataset item, scan the prediction list linearly.
struct OracleTally {
  int correct = 0, total = 0, abstain = 0;
  std::map<std::string, std::pair<int, int>> per_category;
};

OracleTally oracle(const std::vector<qa::Prediction>& preds, const Dataset& ds) {
  OracleTally t;
  for (const auto& item : ds.items) {
    for (const auto& p : preds) {
      if (p.question_id != item.question_id) continue;
      const int hit = (p.chosen_index && *p.chosen_index == *item.gold_index) ? 1 : 0;
      t.correct += hit;
      t.total += 1;
      t.abstain += p.chosen_index ? 0 : 1;
      t.per_category[item.category].first += hit;
      t.per_category[item.category].second += 1;
    }
  }
  return t;
}

json report_without_provenance(const std::filesystem::path& out) {
  auto j = json::parse(glt::testing::slurp(out / "report.json"));
  j.erase("provenance");
  return j;
}

RunConfig mock_config(const std::filesystem::path& cache) {
  RunConfig cfg;
  cfg.mock = true;
  cfg.cache_dir = cache;
  return cfg;
}

}  // namespace

TEST_CASE("evaluate: counting examples") {
  const auto ds = dataset_of({{"c", 0}, {"c", 1}, {"c", 3}});
  const auto r = evaluate({pred("q0", 0), pred("q1", 1), pred("q2", 2)}, ds);
  CHECK(r.correct == 2);
  CHECK(r.total == 3);
  CHECK(r.overall_accuracy() == doctest::Approx(0.6667).epsilon(1e-3));

  const auto none = evaluate({pred("q0", std::nullopt), pred("q1", std::nullopt), pred("q2", std::nullopt)}, ds);
  CHECK(none.overall_accuracy() == 0.0);
  CHECK(none.abstain_count == 3);
}

TEST_CASE("evaluate: per-category example") {
  const auto ds = dataset_of({{"cas", 0}, {"cas", 1}, {"tem", 2}});
  const auto r = evaluate({pred("q0", 0), pred("q1", 1), pred("q2", 0)}, ds);
  REQUIRE(r.per_category.size() == 2);
  CHECK(r.per_category[0] == CategoryTally{"cas", 2, 2});
  CHECK(r.per_category[1] == CategoryTally{"tem", 0, 1});
  CHECK(r.per_category[0].accuracy() == 1.0);
  CHECK(r.per_category[1].accuracy() == 0.0);
  CHECK(r.overall_accuracy() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("evaluate: errors") {
  const auto ds = dataset_of({{"c", 0}});
  CHECK(kind_of([&] { evaluate({pred("nope", 0)}, ds); }) == ErrorKind::UnknownQuestionId);
  CHECK(kind_of([&] { evaluate({pred("q0", 0), pred("q0", 0)}, ds); }) == ErrorKind::DuplicateQuestionId);
  auto no_gold = ds;
  no_gold.items[0].gold_index.reset();
  CHECK(kind_of([&] { evaluate({pred("q0", 0)}, no_gold); }) == ErrorKind::MissingGold);
}

TEST_CASE("evaluate matches the brute-force oracle on random sets") {
  std::mt19937 rng(41);
  const std::vector<std::string> cats{"Cas.", "Tem.", "Des.", "Int.", "Seq."};
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 60);
    std::vector<std::pair<std::string, int>> spec;
    for (int i = 0; i < n; ++i) spec.push_back({cats[rng() % (1 + trial % cats.size())], static_cast<int>(rng() % 5)});
    const auto ds = dataset_of(spec);
    std::vector<qa::Prediction> preds;
    for (int i = 0; i < n; ++i) {
      if (rng() % 7 == 0) continue;  // unanswered questions are simply absent
      const auto r = rng() % 6;
      preds.push_back(pred("q" + std::to_string(i), r == 5 ? std::nullopt : std::optional<int>(static_cast<int>(r))));
    }
    const auto report = evaluate(preds, ds);
    const auto o = oracle(preds, ds);
    CHECK(report.correct == o.correct);
    CHECK(report.total == o.total);
    CHECK(report.abstain_count == o.abstain);
    CHECK(report.per_category.size() == o.per_category.size());
    int sum_correct = 0, sum_total = 0;
    for (const auto& c : report.per_category) {
      CHECK(o.per_category.at(c.category) == std::make_pair(c.correct, c.total));
      sum_correct += c.correct;
      sum_total += c.total;
    }
    CHECK(sum_correct == report.correct);
    CHECK(sum_total == report.total);

    auto shuffled = preds;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(evaluate(shuffled, ds) == report);
  }
}

TEST_CASE("adding an abstention never raises accuracy") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<std::string, int>> spec;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) spec.push_back({"c", static_cast<int>(rng() % 5)});
    auto ds = dataset_of(spec);
    std::vector<qa::Prediction> preds;
    for (int i = 0; i < n; ++i) preds.push_back(pred("q" + std::to_string(i), static_cast<int>(rng() % 5)));
    const double before = evaluate(preds, ds).overall_accuracy();
    ds.items.push_back({"extra", "v", "c", "?", {"a", "b"}, 0});
    preds.push_back(pred("extra", std::nullopt));
    CHECK(evaluate(preds, ds).overall_accuracy() <= before);
  }
}

TEST_CASE("render_table layout") {
  const auto ds = dataset_of({{"Cas.", 0}, {"Cas.", 1}, {"Tem.", 2}});
  const auto r = evaluate({pred("q0", 0), pred("q1", 0), pred("q2", 2)}, ds);
  CHECK(render_table({{"local+global", r}}) ==
        "Scenario     | Cas.  | Tem.   | Avg. Acc\n"
        "-------------+-------+--------+---------\n"
        "local+global | 50.00 | 100.00 | 66.67\n");
}

TEST_CASE("report json") {
  const auto ds = dataset_of({{"a", 0}, {"b", 1}});
  const auto j = evaluate({pred("q0", 0), pred("q1", std::nullopt)}, ds, "fp").to_json();
  CHECK(j["overall_accuracy"] == 0.5);
  CHECK(j["abstain_count"] == 1);
  CHECK(j["per_category"]["a"]["accuracy"] == 1.0);
  CHECK(j["config_fingerprint"] == "fp");
}

TEST_CASE("load_dataset") {
  TempDir dir;
  std::filesystem::create_directories(dir / "videos" / "v1");
  glt::testing::spit(dir / "videos" / "v2.mp4", "x");
  json base = {{"name", "tiny"},
               {"items",
                {{{"question_id", "a"}, {"video_id", "v1"}, {"category", "c"}, {"question", "?"},
                  {"options", {"x", "y", "z", "u", "w"}}, {"gold_index", 0}},
                 {{"question_id", "b"}, {"video_id", "v2"}, {"category", "c"}, {"question", "?"},
                  {"options", {"x", "y"}}, {"gold_index", 1}},
                 {{"question_id", "c"}, {"video_id", "v1"}, {"category", "d"}, {"question", "?"},
                  {"options", {"x", "y", "z"}}, {"gold_index", nullptr}}}}};
  const auto write = [&](const json& j) {
    glt::testing::spit(dir / "ds.json", j.dump());
    return dir / "ds.json";
  };

  SUBCASE("valid") {
    const auto ds = load_dataset(write(base));
    CHECK(ds.name == "tiny");
    CHECK(ds.items.size() == 3);
    CHECK(ds.video_index.at("v1") == dir / "videos" / "v1");
    CHECK(ds.video_index.at("v2") == dir / "videos" / "v2.mp4");
    CHECK_FALSE(ds.items[2].gold_index.has_value());
    const auto groups = ds.by_video();
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].first == "v1");
    CHECK(groups[0].second.size() == 2);
  }
  SUBCASE("duplicate question id") {
    base["items"][1]["question_id"] = "a";
    CHECK(kind_of([&] { load_dataset(write(base)); }) == ErrorKind::DuplicateQuestionId);
  }
  SUBCASE("gold out of range names the field") {
    base["items"][0]["gold_index"] = 7;
    try {
      load_dataset(write(base));
      FAIL("expected SchemaError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SchemaError);
      CHECK(std::string(e.what()).find("$.items[0].gold_index") != std::string::npos);
    }
  }
  SUBCASE("wrong option count") {
    base["items"][1]["options"] = {"only"};
    CHECK(kind_of([&] { load_dataset(write(base)); }) == ErrorKind::SchemaError);
    base["items"][1]["options"] = {"1", "2", "3", "4", "5", "6"};
    CHECK(kind_of([&] { load_dataset(write(base)); }) == ErrorKind::SchemaError);
  }
  SUBCASE("missing field") {
    base["items"][2].erase("question");
    CHECK(kind_of([&] { load_dataset(write(base)); }) == ErrorKind::SchemaError);
  }
  SUBCASE("unresolved video") {
    base["items"][0]["video_id"] = "ghost";
    CHECK(kind_of([&] { load_dataset(write(base)); }) == ErrorKind::UnresolvedVideo);
  }
  SUBCASE("explicit videos map") {
    std::filesystem::create_directories(dir / "elsewhere" / "clipA");
    base["items"][0]["video_id"] = "A";
    base["videos"] = {{"A", "elsewhere/clipA"}};
    CHECK(load_dataset(write(base)).video_index.at("A") == dir / "elsewhere" / "clipA");
  }
  SUBCASE("not json") {
    glt::testing::spit(dir / "bad.json", "{ nope");
    CHECK(kind_of([&] { load_dataset(dir / "bad.json"); }) == ErrorKind::SchemaError);
  }
}

TEST_CASE("run_benchmark: mock accuracy, caching and determinism") {
  TempDir dir;
  const auto ds = load_dataset(glt::testing::write_mock_dataset(dir.path(), 4, 3, 3));
  auto cfg = mock_config(dir / "cache");
  inference::MockVlm vlm;
  inference::MockLlm llm;

  const auto first = pipeline::run_benchmark(ds, cfg, vlm, llm, dir / "run1");
  CHECK(first.ok());
  CHECK(first.report.overall_accuracy() == 1.0);
  CHECK(first.report.total == 12);
  CHECK(first.cache_misses == 4);
  CHECK(vlm.calls() == 4 * 3 * 2);  // each frame captioned once globally and once with the grid
  CHECK(llm.calls() == 12);
  for (const char* f : {"report.json", "report.txt", "predictions.jsonl", "transcripts/vid0.glt.jsonl"}) {
    CHECK(std::filesystem::exists(dir / "run1" / f));
  }

  const auto second = pipeline::run_benchmark(ds, cfg, vlm, llm, dir / "run2");
  CHECK(vlm.calls() == 24);  // all transcripts came from the cache
  CHECK(second.cache_hits == 4);
  CHECK(second.report == first.report);
  CHECK(report_without_provenance(dir / "run1") == report_without_provenance(dir / "run2"));
  CHECK(glt::testing::slurp(dir / "run1" / "predictions.jsonl") ==
        glt::testing::slurp(dir / "run2" / "predictions.jsonl"));

  // predictions come back in dataset order regardless of worker scheduling
  std::vector<std::string> ids;
  for (const auto& p : first.predictions) ids.push_back(p.question_id);
  std::vector<std::string> expected;
  for (const auto& item : ds.items) expected.push_back(item.question_id);
  CHECK(ids == expected);

  const auto report = json::parse(glt::testing::slurp(dir / "run1" / "report.json"));
  CHECK(report["config"]["mode"] == "local+global");
  CHECK(report["abstain_policy"].is_string());
  CHECK(report["provenance"].contains("started_at"));
}

TEST_CASE("run_benchmark: scenarios have distinct fingerprints") {
  TempDir dir;
  const auto ds = load_dataset(glt::testing::write_mock_dataset(dir.path(), 2, 2, 2));
  inference::MockVlm vlm;
  inference::MockLlm llm;
  std::set<std::string> fingerprints;
  for (auto mode : {Mode::Global, Mode::Local, Mode::LocalGlobal}) {
    auto cfg = mock_config(dir / "cache");
    cfg.mode = mode;
    const auto r = pipeline::run_benchmark(ds, cfg, vlm, llm, dir / ("out-" + std::string(to_string(mode))));
    CHECK(r.ok());
    CHECK(r.report.overall_accuracy() == 1.0);  // the tag is visible in either caption kind
    fingerprints.insert(r.report.config_fingerprint);
  }
  CHECK(fingerprints.size() == 3);
}

TEST_CASE("run_benchmark: a broken video is reported and the rest are scored") {
  TempDir dir;
  const auto path = glt::testing::write_mock_dataset(dir.path(), 3, 2, 2);
  glt::testing::spit(dir / "videos" / "vid1" / "000001.png", "corrupt");
  const auto ds = load_dataset(path);
  inference::MockVlm vlm;
  inference::MockLlm llm;
  const auto r = pipeline::run_benchmark(ds, mock_config(dir / "cache"), vlm, llm, dir / "out");
  CHECK_FALSE(r.ok());
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].video_id == "vid1");
  CHECK(r.failures[0].error == "UnreadableImage");
  CHECK(r.report.total == 4);
  CHECK(r.report.correct == 4);
  const auto report = json::parse(glt::testing::slurp(dir / "out" / "report.json"));
  CHECK(report["failures"].size() == 1);
}

TEST_CASE("run_benchmark: inference failures are per question") {
  class Flaky final : public inference::TextModel {
   public:
    std::string complete(const inference::PromptPair& p, const inference::DecodingConfig&) const override {
      if (p.user.find("vid0-q1") != std::string::npos) throw Error(ErrorKind::Timeout, "slow");
      return inference::mock_llm(p);
    }
    std::string model_id() const override { return "flaky"; }
  };
  TempDir dir;
  const auto ds = load_dataset(glt::testing::write_mock_dataset(dir.path(), 2, 2, 2));
  inference::MockVlm vlm;
  Flaky llm;
  const auto r = pipeline::run_benchmark(ds, mock_config(dir / "cache"), vlm, llm, dir / "out");
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].question_id == "vid0-q1");
  CHECK(r.failures[0].error == "Timeout");
  CHECK(r.report.total == 3);
}
