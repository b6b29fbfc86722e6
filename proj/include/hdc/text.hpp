#ifndef HDC_TEXT_HPP_
#define HDC_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace hdc {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Whole-field parses; throw ParseError on trailing junk or overflow.
double parse_double(std::string_view text);
std::uint64_t parse_unsigned(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

template <typename T>
std::string join(const std::vector<T>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(items[i]);
    } else if constexpr (std::is_arithmetic_v<T>) {
      out += std::to_string(items[i]);
    } else {
      out += items[i];
    }
  }
  return out;
}

}  // namespace hdc

#endif  // HDC_TEXT_HPP_
