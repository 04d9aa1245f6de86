#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bufmanet::csv {

/// Shortest round-trip decimal form, '.' separator regardless of locale.
/// Infinities are written as "inf" / "-inf", NaN as "nan".
std::string format_double(double value);

/// Inverse of format_double. Throws std::invalid_argument on malformed text.
double parse_double(std::string_view text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position of `name`; throws std::out_of_range if absent.
  std::size_t column(std::string_view name) const;
};

/// Comma-separated, one header row, no quoting (fields never contain commas).
void write(std::ostream& out, const Table& table);
Table read(std::istream& in);

}  // namespace bufmanet::csv
