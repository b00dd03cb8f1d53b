#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace glt {

/// Exact positive rational, used for sampling rates such as 1, 2 or 30000/1001.
class Rational {
 public:
  constexpr Rational() = default;
  /// Throws ConfigError unless den != 0 and the value is positive.
  Rational(std::int64_t num, std::int64_t den = 1);

  /// Accepts "2", "0.5", "30000/1001".
  static Rational parse(std::string_view text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const noexcept { return den_ == 1; }

  /// "2" for integers, "30000/1001" otherwise.
  std::string to_string() const;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

/// Seconds at which frame `index` is sampled under `fps`: index / fps.
double timestamp_for(std::int64_t index, const Rational& fps) noexcept;

using Rgb = std::array<std::uint8_t, 3>;

/// n x m grid marker: `rows` horizontal bands by `cols` vertical bands.
struct GridSpec {
  int rows = 2;
  int cols = 3;
  Rgb line_color{0, 0, 0};
  int line_thickness_px = 2;

  int cell_count() const noexcept { return rows * cols; }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// Parses "RxC" (rows x cols), e.g. "2x3". Other fields keep their defaults.
  static GridSpec parse(std::string_view text);
  /// "2x3"
  std::string label() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace glt
