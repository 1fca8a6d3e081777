#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vbd::csv {

/// Malformed CSV input. Row is 1-based counting the header; column is the
/// header name when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::string column)
      : std::runtime_error(what), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Shortest form that is still exact at 17 significant digits.
std::string format_number(double value);

/// Strict decimal parse; throws std::invalid_argument on trailing junk.
double parse_number(std::string_view text);

std::vector<std::string_view> split_row(std::string_view line);

/// Writes comma-joined cells followed by a newline.
void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace vbd::csv
