#include "revdetect/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "revdetect/error.hpp"

namespace revdetect::csv {

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::string strip_bom(std::string s) {
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF &&
      static_cast<unsigned char>(s[1]) == 0xBB &&
      static_cast<unsigned char>(s[2]) == 0xBF)
    s.erase(0, 3);
  return s;
}

}  // namespace

Table read(std::istream& in) {
  Table table;
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  data = strip_bom(std::move(data));

  std::size_t pos = 0;
  std::size_t line = 1;

  // leading comment lines
  while (pos < data.size() && data[pos] == '#') {
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string c = data.substr(pos, end - pos);
    if (!c.empty() && c.back() == '\r') c.pop_back();
    table.comments.push_back(std::move(c));
    pos = end + 1;
    ++line;
  }

  bool have_header = false;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t record_line = line;

  auto finish_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
    bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (!have_header) {
        table.header = std::move(record);
        have_header = true;
      } else {
        table.rows.push_back(std::move(record));
        table.row_lines.push_back(record_line);
      }
    }
    record.clear();
  };

  for (; pos < data.size(); ++pos) {
    char c = data[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < data.size() && data[pos + 1] == '"') {
          field.push_back('"');
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_was_quoted) {
          in_quotes = true;
          field_was_quoted = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        break;
      case '\r':
        break;
      case '\n':
        finish_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw Error("csv: unterminated quoted field starting near line " +
                             std::to_string(record_line));
  if (!field.empty() || !record.empty() || field_was_quoted) finish_record();
  if (!have_header) throw Error("csv: missing header row");
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  return read(in);
}

std::string quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, res.ptr);
}

}  // namespace revdetect::csv
