#include "rfbm/csv.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>

namespace rfbm {

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, std::span<const std::string_view> header,
               std::span<const std::span<const double>> columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_csv: header/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  }
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << format_real(columns[j][i]);
    os << '\n';
  }
}

}  // namespace rfbm
