#pragma once

#include <string>

namespace lss {

/// Locale-independent decimal rendering. precision < 0 gives the shortest
/// round-trip form; otherwise printf-%g style with that many significant
/// digits.
std::string format_double(double value, int precision = 12);

}  // namespace lss
