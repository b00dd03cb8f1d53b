#include "glt/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "glt/error.hpp"

namespace glt {
namespace {

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw Error(ErrorKind::ConfigError, std::string(what) + ": not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::ConfigError, "fps: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num <= 0) throw Error(ErrorKind::ConfigError, "fps: must be positive");
  const auto g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(text.substr(0, slash), "fps"), parse_int(text.substr(slash + 1), "fps"));
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    if (frac.size() > 9) throw Error(ErrorKind::ConfigError, "fps: too many decimals");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const std::int64_t w = whole.empty() ? 0 : parse_int(whole, "fps");
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac, "fps");
    return Rational(w * scale + f, scale);
  }
  return Rational(parse_int(text, "fps"), 1);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

double timestamp_for(std::int64_t index, const Rational& fps) noexcept {
  return static_cast<double>(index * fps.den()) / static_cast<double>(fps.num());
}

void GridSpec::validate() const {
  if (rows < 1) throw Error(ErrorKind::ConfigError, "grid.rows must be >= 1, got " + std::to_string(rows));
  if (cols < 1) throw Error(ErrorKind::ConfigError, "grid.cols must be >= 1, got " + std::to_string(cols));
  if (line_thickness_px < 1) {
    throw Error(ErrorKind::ConfigError,
                "grid.line_thickness_px must be >= 1, got " + std::to_string(line_thickness_px));
  }
}

GridSpec GridSpec::parse(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) {
    throw Error(ErrorKind::ConfigError, "grid: expected RxC (e.g. 2x3), got '" + std::string(text) + "'");
  }
  GridSpec grid;
  const auto rows = parse_int(text.substr(0, x), "grid.rows");
  const auto cols = parse_int(text.substr(x + 1), "grid.cols");
  constexpr auto kMax = std::numeric_limits<int>::max();
  grid.rows = static_cast<int>(std::clamp<std::int64_t>(rows, -1, kMax));
  grid.cols = static_cast<int>(std::clamp<std::int64_t>(cols, -1, kMax));
  grid.validate();
  return grid;
}

std::string GridSpec::label() const { return std::to_string(rows) + "x" + std::to_string(cols); }

}  // namespace glt
