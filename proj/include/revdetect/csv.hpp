#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace revdetect::csv {

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Lines starting with '#' before the header are collected as
// comments and skipped.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based physical line of each row

  /// Index of `name` in the header, or -1.
  int column(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

std::string quote(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace revdetect::csv
