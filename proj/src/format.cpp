#include "lss/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace lss {

std::string format_double(double value, int precision) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto result =
      precision < 0
          ? std::to_chars(buf.data(), buf.data() + buf.size(), value)
          : std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general,
                          precision);
  return std::string(buf.data(), result.ptr);
}

}  // namespace lss
