#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glt/inference.hpp"
#include "glt/transcript.hpp"

namespace glt::qa {

struct QAItem {
  std::string question_id;
  std::string video_id;
  std::string category;
  std::string question;
  std::vector<std::string> options;  // 2..5, lettered A.. in this order
  std::optional<int> gold_index;
};

enum class ExtractionMethod { Strict, Fallback, Abstain };

std::string_view to_string(ExtractionMethod m) noexcept;
ExtractionMethod extraction_method_from(std::string_view text);

struct Extraction {
  std::optional<int> index;  // nullopt = abstain
  ExtractionMethod method = ExtractionMethod::Abstain;
};

struct Prediction {
  std::string question_id;
  std::optional<int> chosen_index;  // nullopt = ABSTAIN
  std::string raw_output;
  ExtractionMethod extraction_method = ExtractionMethod::Abstain;

  bool abstained() const noexcept { return !chosen_index.has_value(); }
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Pulls an option index out of raw model text. The strict pass looks for
/// `answer [L] answer` (any case, brackets and whitespace optional). The
/// fallback pass accepts a reply that is a single letter, else the first
/// standalone capital A-E (skipping the article in "A man ..." and
/// abbreviations like "E.g.") or bracketed lowercase letter such as "(c)".
/// Letters past `num_options` are ignored. Total: never throws.
Extraction extract_answer(std::string_view raw, int num_options, bool allow_fallback = true);

/// Builds the QA prompt from the rendered transcript, asks `llm`, and
/// extracts the answer. Transport errors propagate; nothing is fabricated.
/// Errors: EmptyTranscript, TooFewOptions, TooManyOptions, inference errors.
Prediction answer(const transcript::Transcript& t, const QAItem& item, const inference::TextModel& llm,
                  const inference::DecodingConfig& decoding, bool allow_fallback = true);

/// Same as answer() but with the transcript already rendered to text.
Prediction answer_text(std::string_view transcript_text, const QAItem& item, const inference::TextModel& llm,
                       const inference::DecodingConfig& decoding, bool allow_fallback = true);

/// {question_id, chosen_index (null on abstain), extraction_method, raw_output}
nlohmann::ordered_json to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& j);

}  // namespace glt::qa
