#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace rfbm {

/// 17 significant digits (round-trips every double).
std::string format_real(double x);

/// Writes a header line and one row per index; all columns must have equal length.
void write_csv(std::ostream& os, std::span<const std::string_view> header,
               std::span<const std::span<const double>> columns);

}  // namespace rfbm
