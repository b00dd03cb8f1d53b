#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glt/qa.hpp"

namespace glt::eval {

struct Dataset {
  std::string name;
  std::vector<qa::QAItem> items;
  /// video_id -> frame directory or video file
  std::map<std::string, std::filesystem::path> video_index;

  /// Items grouped by video in first-appearance order of the video.
  std::vector<std::pair<std::string, std::vector<const qa::QAItem*>>> by_video() const;
};

/// Canonical schema:
///   {"name": str, "items": [{question_id, video_id, category, question,
///    options: [2..5 str], gold_index: int|null}], "videos": {id: path}?}
/// Video paths are relative to the dataset file. Without a "videos" map each
/// id resolves to `videos/<id>` (a frame directory) or `videos/<id>.*` beside it.
/// Errors: SchemaError (with field path), DuplicateQuestionId, UnresolvedVideo.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct CategoryTally {
  std::string category;
  int correct = 0;
  int total = 0;
  double accuracy() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
  friend bool operator==(const CategoryTally&, const CategoryTally&) = default;
};

struct EvalReport {
  int correct = 0;
  int total = 0;
  int abstain_count = 0;
  /// Categories in order of first appearance in the dataset.
  std::vector<CategoryTally> per_category;
  std::string config_fingerprint;

  double overall_accuracy() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
  nlohmann::ordered_json to_json() const;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Exact match: correct iff chosen_index == gold_index; abstentions count as wrong.
/// Errors: UnknownQuestionId, MissingGold, DuplicateQuestionId.
EvalReport evaluate(const std::vector<qa::Prediction>& predictions, const Dataset& dataset,
                    std::string config_fingerprint = {});

/// Text table with one column per category plus "Avg. Acc", percentages to two decimals.
std::string render_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace glt::eval
