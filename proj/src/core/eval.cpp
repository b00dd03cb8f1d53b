#include "glt/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "glt/error.hpp"

namespace glt::eval {
namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::pair<std::string, std::vector<const qa::QAItem*>>> Dataset::by_video() const {
  std::vector<std::pair<std::string, std::vector<const qa::QAItem*>>> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& item : items) {
    auto [it, inserted] = slot.emplace(item.video_id, out.size());
    if (inserted) out.push_back({item.video_id, {}});
    out[it->second].second.push_back(&item);
  }
  return out;
}

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::SchemaError, where + ": " + what);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) schema_error(where + "." + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_string()) schema_error(where + "." + key, "expected a string, got " + std::string(v.type_name()));
  auto s = v.get<std::string>();
  if (s.empty()) schema_error(where + "." + key, "must not be empty");
  return s;
}

std::optional<fs::path> default_locator(const fs::path& base_dir, const std::string& video_id) {
  const auto videos = base_dir / "videos";
  if (fs::exists(videos / video_id)) return videos / video_id;
  if (!fs::is_directory(videos)) return std::nullopt;
  for (const auto& entry : fs::directory_iterator(videos)) {
    if (entry.is_regular_file() && entry.path().stem() == video_id) return entry.path();
  }
  return std::nullopt;
}

}  // namespace

Dataset parse_dataset(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) schema_error("$", "expected an object");
  Dataset ds;
  ds.name = require_string(j, "name", "$");
  if (!j.contains("items") || !j.at("items").is_array()) schema_error("$.items", "expected an array");

  std::set<std::string> seen;
  const auto& items = j.at("items");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto where = "$.items[" + std::to_string(i) + "]";
    const auto& it = items[i];
    if (!it.is_object()) schema_error(where, "expected an object");
    qa::QAItem item;
    item.question_id = require_string(it, "question_id", where);
    item.video_id = require_string(it, "video_id", where);
    item.category = require_string(it, "category", where);
    item.question = require_string(it, "question", where);
    if (!it.contains("options") || !it.at("options").is_array()) schema_error(where + ".options", "expected an array");
    for (std::size_t k = 0; k < it.at("options").size(); ++k) {
      const auto& o = it.at("options")[k];
      if (!o.is_string()) schema_error(where + ".options[" + std::to_string(k) + "]", "expected a string");
      item.options.push_back(o.get<std::string>());
    }
    if (item.options.size() < prompting::kMinOptions || item.options.size() > prompting::kMaxOptions) {
      schema_error(where + ".options", "expected 2..5 options, got " + std::to_string(item.options.size()));
    }
    if (it.contains("gold_index") && !it.at("gold_index").is_null()) {
      const auto& g = it.at("gold_index");
      if (!g.is_number_integer()) schema_error(where + ".gold_index", "expected an integer");
      const auto gold = g.get<std::int64_t>();
      if (gold < 0 || gold >= static_cast<std::int64_t>(item.options.size())) {
        schema_error(where + ".gold_index",
                     std::to_string(gold) + " out of range for " + std::to_string(item.options.size()) + " options");
      }
      item.gold_index = static_cast<int>(gold);
    }
    if (!seen.insert(item.question_id).second) {
      throw Error(ErrorKind::DuplicateQuestionId, where + ": question_id '" + item.question_id + "' repeats");
    }
    ds.items.push_back(std::move(item));
  }

  if (j.contains("videos")) {
    const auto& videos = j.at("videos");
    if (!videos.is_object()) schema_error("$.videos", "expected an object");
    for (const auto& [id, loc] : videos.items()) {
      if (!loc.is_string()) schema_error("$.videos." + id, "expected a path string");
      fs::path p = loc.get<std::string>();
      ds.video_index[id] = p.is_absolute() ? p : base_dir / p;
    }
  }
  for (const auto& item : ds.items) {
    if (ds.video_index.count(item.video_id)) continue;
    if (auto loc = default_locator(base_dir, item.video_id)) {
      ds.video_index[item.video_id] = *loc;
    } else {
      throw Error(ErrorKind::UnresolvedVideo,
                  "question '" + item.question_id + "': no media for video '" + item.video_id + "'");
    }
  }
  for (const auto& [id, loc] : ds.video_index) {
    if (!fs::exists(loc)) throw Error(ErrorKind::UnresolvedVideo, "video '" + id + "': " + loc.string() + " does not exist");
  }
  return ds;
}

Dataset load_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
  }
  return parse_dataset(j, path.parent_path());
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["overall_accuracy"] = overall_accuracy();
  j["correct"] = correct;
  j["total"] = total;
  j["abstain_count"] = abstain_count;
  j["per_category"] = nlohmann::ordered_json::object();
  for (const auto& c : per_category) {
    j["per_category"][c.category] = {{"correct", c.correct}, {"total", c.total}, {"accuracy", c.accuracy()}};
  }
  j["config_fingerprint"] = config_fingerprint;
  return j;
}

EvalReport evaluate(const std::vector<qa::Prediction>& predictions, const Dataset& dataset,
                    std::string config_fingerprint) {
  std::unordered_map<std::string, const qa::QAItem*> by_id;
  for (const auto& item : dataset.items) by_id.emplace(item.question_id, &item);

  std::unordered_map<std::string, CategoryTally> tallies;
  std::set<std::string> seen;
  EvalReport report;
  report.config_fingerprint = std::move(config_fingerprint);
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.question_id);
    if (it == by_id.end()) throw Error(ErrorKind::UnknownQuestionId, "'" + p.question_id + "' not in dataset");
    const auto& item = *it->second;
    if (!item.gold_index) throw Error(ErrorKind::MissingGold, "'" + p.question_id + "' has no gold answer");
    if (!seen.insert(p.question_id).second) {
      throw Error(ErrorKind::DuplicateQuestionId, "two predictions for '" + p.question_id + "'");
    }
    const bool right = p.chosen_index.has_value() && *p.chosen_index == *item.gold_index;
    auto& tally = tallies[item.category];
    tally.category = item.category;
    ++tally.total;
    ++report.total;
    if (right) {
      ++tally.correct;
      ++report.correct;
    }
    if (p.abstained()) ++report.abstain_count;
  }
  std::set<std::string> emitted;
  for (const auto& item : dataset.items) {
    if (tallies.count(item.category) && emitted.insert(item.category).second) {
      report.per_category.push_back(tallies.at(item.category));
    }
  }
  return report;
}

namespace {

std::string percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::vector<std::string> categories;
  for (const auto& [_, report] : rows) {
    for (const auto& c : report.per_category) {
      if (std::find(categories.begin(), categories.end(), c.category) == categories.end()) {
        categories.push_back(c.category);
      }
    }
  }
  std::vector<std::string> header{"Scenario"};
  header.insert(header.end(), categories.begin(), categories.end());
  header.push_back("Avg. Acc");

  std::vector<std::vector<std::string>> cells{header};
  for (const auto& [scenario, report] : rows) {
    std::vector<std::string> line{scenario};
    for (const auto& cat : categories) {
      const auto it = std::find_if(report.per_category.begin(), report.per_category.end(),
                                   [&](const auto& c) { return c.category == cat; });
      line.push_back(it == report.per_category.end() ? "-" : percent(it->accuracy()));
    }
    line.push_back(percent(report.overall_accuracy()));
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i > 0) out += " | ";
      out += i + 1 == cells[r].size() ? cells[r][i] : pad(cells[r][i], widths[i]);
    }
    out += "\n";
    if (r == 0) {
      for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i > 0) out += "-+-";
        out += std::string(widths[i], '-');
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace glt::eval
