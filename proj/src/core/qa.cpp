#include "glt/qa.hpp"

#include <cctype>
#include <regex>

#include "glt/error.hpp"

namespace glt::qa {

std::string_view to_string(ExtractionMethod m) noexcept {
  switch (m) {
    case ExtractionMethod::Strict: return "strict";
    case ExtractionMethod::Fallback: return "fallback";
    case ExtractionMethod::Abstain: return "abstain";
  }
  return "abstain";
}

ExtractionMethod extraction_method_from(std::string_view text) {
  if (text == "strict") return ExtractionMethod::Strict;
  if (text == "fallback") return ExtractionMethod::Fallback;
  if (text == "abstain") return ExtractionMethod::Abstain;
  throw Error(ErrorKind::SchemaError, "unknown extraction_method '" + std::string(text) + "'");
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_open(char c) { return c == '(' || c == '[' || c == '{' || c == '<'; }
bool is_close(char c) { return c == ')' || c == ']' || c == '}' || c == '>'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

// "A man ...", "A dog ..." read as the article, "A is ..." / "A was ..." as the option
bool is_article(std::string_view text, std::size_t i) {
  if (text[i] != 'A' || i + 2 >= text.size() || text[i + 1] != ' ' || !is_lower(text[i + 2])) return false;
  std::size_t end = i + 2;
  while (end < text.size() && is_lower(text[end])) ++end;
  const auto word = text.substr(i + 2, end - i - 2);
  return word != "is" && word != "was";
}

// "E.g.", "D.C."
bool is_abbreviation(std::string_view text, std::size_t i) {
  return i + 2 < text.size() && text[i + 1] == '.' && std::isalpha(static_cast<unsigned char>(text[i + 2]));
}

std::optional<char> fallback_letter(std::string_view text, int num_options) {
  const auto in_range = [&](char c) { return std::toupper(static_cast<unsigned char>(c)) - 'A' < num_options; };

  // the whole reply is a single letter, possibly bracketed or punctuated
  std::string core;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || is_open(c) || is_close(c) || c == '.' || c == ':') continue;
    core += c;
  }
  if (core.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(core[0])));
    if (c >= 'A' && c <= 'E') return in_range(c) ? std::optional<char>(c) : std::nullopt;
  }

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const char prev = i > 0 ? text[i - 1] : ' ';
    const char next = i + 1 < text.size() ? text[i + 1] : ' ';
    if (is_word_char(prev) || is_word_char(next)) continue;
    if (c >= 'A' && c <= 'E') {
      if (is_article(text, i) || is_abbreviation(text, i)) continue;
    } else if (c >= 'a' && c <= 'e') {
      if (!is_open(prev) || !is_close(next)) continue;  // lowercase only as "(c)", "[c]"
    } else {
      continue;
    }
    if (in_range(c)) return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return std::nullopt;
}

}  // namespace

Extraction extract_answer(std::string_view raw, int num_options, bool allow_fallback) {
  static const std::regex strict(R"(\banswer\s*[\[\(\{<]?\s*([a-e])\s*[\]\)\}>]?\s*answer\b)",
                                 std::regex::icase | std::regex::ECMAScript);
  const std::string text(raw);
  for (std::sregex_iterator it(text.begin(), text.end(), strict), end; it != end; ++it) {
    const int idx = std::toupper(static_cast<unsigned char>((*it)[1].str()[0])) - 'A';
    if (idx < num_options) return {idx, ExtractionMethod::Strict};
  }
  if (allow_fallback) {
    if (auto letter = fallback_letter(text, num_options)) return {*letter - 'A', ExtractionMethod::Fallback};
  }
  return {std::nullopt, ExtractionMethod::Abstain};
}

Prediction answer_text(std::string_view transcript_text, const QAItem& item, const inference::TextModel& llm,
                       const inference::DecodingConfig& decoding, bool allow_fallback) {
  const auto prompts = prompting::qa_prompt(transcript_text, item.question, item.options);
  Prediction p;
  p.question_id = item.question_id;
  p.raw_output = llm.complete(prompts, decoding);
  const auto extraction = extract_answer(p.raw_output, static_cast<int>(item.options.size()), allow_fallback);
  p.chosen_index = extraction.index;
  p.extraction_method = extraction.method;
  return p;
}

Prediction answer(const transcript::Transcript& t, const QAItem& item, const inference::TextModel& llm,
                  const inference::DecodingConfig& decoding, bool allow_fallback) {
  return answer_text(transcript::render_text(t), item, llm, decoding, allow_fallback);
}

nlohmann::ordered_json to_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["question_id"] = p.question_id;
  j["chosen_index"] = p.chosen_index ? nlohmann::ordered_json(*p.chosen_index) : nlohmann::ordered_json(nullptr);
  j["extraction_method"] = to_string(p.extraction_method);
  j["raw_output"] = p.raw_output;
  return j;
}

Prediction prediction_from_json(const nlohmann::json& j) {
  try {
    Prediction p;
    p.question_id = j.at("question_id").get<std::string>();
    if (!j.at("chosen_index").is_null()) p.chosen_index = j.at("chosen_index").get<int>();
    p.extraction_method = extraction_method_from(j.at("extraction_method").get<std::string>());
    p.raw_output = j.at("raw_output").get<std::string>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("prediction: ") + e.what());
  }
}

}  // namespace glt::qa
