#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glt/types.hpp"

namespace glt::prompting {

/// System + user message pair. An empty `system` means "send no system
/// message" so the model falls back to its built-in default.
struct PromptPair {
  std::optional<std::string> system;
  std::string user;

  bool uses_model_default_system() const noexcept { return !system.has_value(); }
  friend bool operator==(const PromptPair&, const PromptPair&) = default;
};

struct CellLabel {
  int ordinal = 0;  // 1-based
  std::string column_word;
  std::string row_word;

  /// "Cell1(left, lower)"
  std::string rendered() const;
  friend bool operator==(const CellLabel&, const CellLabel&) = default;
};

/// Row-major from the lower-left cell: left to right, bottom row first.
std::vector<CellLabel> cell_labels(const GridSpec& grid);

PromptPair local_prompt(const GridSpec& grid);
PromptPair global_prompt();

/// Question/option prompt around a rendered transcript. Options are lettered
/// A.. in input order. Errors: EmptyTranscript, TooFewOptions (< 2), TooManyOptions (> 5).
PromptPair qa_prompt(std::string_view transcript_text, std::string_view question,
                     const std::vector<std::string>& options);

/// Option letter for a 0-based index ('A' + index).
char option_letter(std::size_t index);

inline constexpr std::size_t kMinOptions = 2;
inline constexpr std::size_t kMaxOptions = 5;

/// Single-pass `{name}` substitution; unknown placeholders are left as-is.
std::string render_template(std::string_view tpl,
                            const std::vector<std::pair<std::string_view, std::string_view>>& values);

/// Digest over every template, used in config fingerprints.
std::string templates_digest();

}  // namespace glt::prompting
