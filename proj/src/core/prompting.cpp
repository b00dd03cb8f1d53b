#include "glt/prompting.hpp"

#include "glt/digest.hpp"
#include "glt/error.hpp"
#include "glt/prompt_templates.hpp"

namespace glt::prompting {
namespace {

std::string column_word(int col, int cols) {
  if (cols == 3) {
    static constexpr const char* kWords[] = {"left", "middle", "right"};
    return kWords[col];
  }
  if (cols == 2) return col == 0 ? "left" : "right";
  return "col-" + std::to_string(col + 1);
}

std::string row_word(int row_from_bottom, int rows) {
  if (rows == 2) return row_from_bottom == 0 ? "lower" : "upper";
  return "row-" + std::to_string(row_from_bottom + 1);
}

std::string color_name(const Rgb& c) {
  if (c == Rgb{0, 0, 0}) return "black";
  if (c == Rgb{255, 255, 255}) return "white";
  return "rgb(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
}

}  // namespace

std::string CellLabel::rendered() const {
  return "Cell" + std::to_string(ordinal) + "(" + column_word + ", " + row_word + ")";
}

std::vector<CellLabel> cell_labels(const GridSpec& grid) {
  std::vector<CellLabel> labels;
  labels.reserve(static_cast<std::size_t>(grid.cell_count()));
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      labels.push_back({r * grid.cols + c + 1, column_word(c, grid.cols), row_word(r, grid.rows)});
    }
  }
  return labels;
}

std::string render_template(std::string_view tpl,
                            const std::vector<std::pair<std::string_view, std::string_view>>& values) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      const auto close = tpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = tpl.substr(i + 1, close - i - 1);
        bool substituted = false;
        for (const auto& [key, value] : values) {
          if (key == name) {
            out += value;
            substituted = true;
            break;
          }
        }
        if (substituted) {
          i = close + 1;
          continue;
        }
      }
    }
    out += tpl[i++];
  }
  return out;
}

PromptPair local_prompt(const GridSpec& grid) {
  grid.validate();
  const auto labels = cell_labels(grid);
  std::string list;
  std::string format;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto label = labels[i].rendered();
    if (i > 0) list += ", ";
    list += label;
    // two cells per line, comma between the pair
    if (i > 0) format += (i % 2 == 1) ? ", " : "\n";
    format += label + ": Caption for Cell" + std::to_string(labels[i].ordinal);
  }
  const auto grid_label = grid.label();
  const auto count = std::to_string(grid.cell_count());
  const auto color = color_name(grid.line_color);
  return {render_template(templates::kLocalSystem, {{"grid", grid_label},
                                                     {"color", color},
                                                     {"cell_count", count},
                                                     {"cell_list", list},
                                                     {"output_format", format}}),
          std::string(templates::kLocalUser)};
}

PromptPair global_prompt() { return {std::nullopt, std::string(templates::kGlobalUser)}; }

char option_letter(std::size_t index) { return static_cast<char>('A' + index); }

PromptPair qa_prompt(std::string_view transcript_text, std::string_view question,
                     const std::vector<std::string>& options) {
  if (transcript_text.empty()) throw Error(ErrorKind::EmptyTranscript, "qa prompt needs a transcript");
  if (options.size() < kMinOptions) {
    throw Error(ErrorKind::TooFewOptions, std::to_string(options.size()) + " option(s); need at least 2");
  }
  if (options.size() > kMaxOptions) {
    throw Error(ErrorKind::TooManyOptions, std::to_string(options.size()) + " options; at most 5 supported");
  }
  std::string rendered_options;
  std::string letters;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) {
      rendered_options += '\n';
      letters += " or ";
    }
    rendered_options += option_letter(i);
    rendered_options += ". " + options[i];
    letters += option_letter(i);
  }
  return {render_template(templates::kQaSystem, {{"transcript", transcript_text}}),
          render_template(templates::kQaUser,
                          {{"question", question}, {"options", rendered_options}, {"letters", letters}})};
}

std::string templates_digest() {
  std::string all;
  for (auto t : {templates::kLocalSystem, templates::kLocalUser, templates::kGlobalUser, templates::kQaSystem,
                 templates::kQaUser}) {
    all += t;
    all += '\0';
  }
  return content_digest(all);
}

}  // namespace glt::prompting
