#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cats::csv {

/// Rows of raw text cells. Keeping cells as strings makes the round-trip
/// guarantee trivial: parse() preserves content exactly and emit() quotes
/// canonically (only when required), so emit(parse(x)) == x for anything
/// this module emitted.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest decimal text that parses back to exactly this double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: buffer too small");
  return std::string(buf, end);
}

inline std::string format_int(long long v) { return std::to_string(v); }

inline double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("csv: malformed number: " + std::string(text));
  return v;
}

inline long long parse_int(std::string_view text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("csv: malformed integer: " + std::string(text));
  return v;
}

namespace detail {

inline bool needs_quoting(std::string_view cell) {
  return cell.find_first_of(",\"\n\r") != std::string_view::npos;
}

inline void emit_cell(std::string& out, std::string_view cell) {
  if (!needs_quoting(cell)) {
    out += cell;
    return;
  }
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

inline void emit_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    emit_cell(out, row[i]);
  }
  out += '\n';
}

}  // namespace detail

inline std::string emit(const Table& t) {
  std::string out;
  detail::emit_row(out, t.header);
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw std::invalid_argument("csv: row width differs from header");
    detail::emit_row(out, row);
  }
  return out;
}

inline Table parse(std::string_view text) {
  Table t;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool row_started = false;
  auto flush_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
  };
  auto flush_row = [&] {
    flush_cell();
    if (t.header.empty())
      t.header = std::move(row);
    else
      t.rows.push_back(std::move(row));
    row.clear();
    row_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        flush_cell();
        row_started = true;
        break;
      case '\r':
        break;  // tolerate CRLF input; emit() always writes plain LF
      case '\n':
        flush_row();
        break;
      default:
        cell += c;
        row_started = true;
    }
  }
  if (in_quotes) throw std::invalid_argument("csv: unterminated quoted cell");
  if (row_started || !cell.empty() || !row.empty()) flush_row();
  for (const auto& r : t.rows)
    if (r.size() != t.header.size())
      throw std::invalid_argument("csv: ragged row (got " + std::to_string(r.size()) +
                                  " cells, header has " + std::to_string(t.header.size()) + ")");
  return t;
}

inline void write_file(const std::string& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot open for writing: " + path);
  std::string text = emit(t);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("csv: write failed: " + path);
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

}  // namespace cats::csv
