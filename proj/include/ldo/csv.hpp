#pragma once

// RFC 4180 CSV reading and writing with positioned parse errors.

#include "ldo/common.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ldo {

/// Malformed input; line and column are 1-based.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

/// Shortest round-trip text for a double (17 significant digits).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << "\r\n";
}

struct CsvField {
  std::string text;
  int line;
  int column;
};

using CsvRecord = std::vector<CsvField>;

/// Splits a stream into records. Quoted fields may contain separators, quotes and newlines.
inline std::vector<CsvRecord> read_csv_records(std::istream& in) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  int line = 1;
  int column = 1;
  int field_line = 1;
  int field_col = 1;
  bool in_quotes = false;
  bool was_quoted = false;
  bool record_has_content = false;

  auto end_field = [&] {
    current.push_back({field, field_line, field_col});
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    if (record_has_content || !current.empty()) {
      end_field();
      records.push_back(std::move(current));
    }
    current.clear();
    field.clear();
    record_has_content = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
          column += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field += c;
        if (c == '\n') {
          ++line;
          column = 0;
        }
      }
      ++column;
      continue;
    }
    if (!record_has_content && field.empty() && current.empty()) {
      field_line = line;
      field_col = column;
    }
    switch (c) {
      case '"':
        if (!field.empty() || was_quoted) throw ParseError("unexpected quote inside unquoted field", line, column);
        in_quotes = true;
        was_quoted = true;
        record_has_content = true;
        ++column;
        break;
      case ',':
        end_field();
        record_has_content = true;
        ++column;
        field_line = line;
        field_col = column;
        break;
      case '\r':
        if (in.peek() == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        column = 1;
        field_line = line;
        field_col = 1;
        break;
      default:
        if (was_quoted) throw ParseError("text after closing quote", line, column);
        field += c;
        record_has_content = true;
        ++column;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", line, column);
  end_record();
  return records;
}

inline double parse_double(const CsvField& f) {
  std::string t = f.text;
  const auto b = t.find_first_not_of(" \t");
  const auto e = t.find_last_not_of(" \t");
  if (b == std::string::npos) throw ParseError("empty numeric field", f.line, f.column);
  t = t.substr(b, e - b + 1);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || std::isnan(v))
    throw ParseError("not a number: '" + f.text + "'", f.line, f.column);
  return v;
}

inline long long parse_int(const CsvField& f) {
  const double v = parse_double(f);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw ParseError("not an integer: '" + f.text + "'", f.line, f.column);
  return static_cast<long long>(v);
}

inline std::vector<CsvRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv_records(in);
}

/// True when every field of the record is non-numeric, i.e. it looks like a header row.
inline bool is_header_record(const CsvRecord& r) {
  for (const auto& f : r) {
    try {
      parse_double(f);
      return false;
    } catch (const ParseError&) {
    }
  }
  return true;
}

}  // namespace ldo
