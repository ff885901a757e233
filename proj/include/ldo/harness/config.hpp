#pragma once

// Experiment recipes: a TOML subset (sections, key = value, strings, numbers, booleans,
// possibly nested and multi-line arrays, # comments) and the typed ExperimentConfig.

#include "ldo/common.hpp"

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ldo::harness {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TomlValue {
  enum class Type { Bool, Int, Float, String, Array };
  Type type = Type::Int;
  bool b = false;
  long long i = 0;
  double f = 0.0;
  std::string s;
  std::vector<TomlValue> arr;

  bool is_number() const { return type == Type::Int || type == Type::Float; }
  double number() const { return type == Type::Int ? static_cast<double>(i) : f; }
};

/// Canonical text of a value; parsing it back yields the same value.
inline std::string to_toml(const TomlValue& v) {
  switch (v.type) {
    case TomlValue::Type::Bool: return v.b ? "true" : "false";
    case TomlValue::Type::Int: return std::to_string(v.i);
    case TomlValue::Type::Float: {
      if (std::isinf(v.f)) return v.f > 0 ? "inf" : "-inf";
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.f);
      std::string t = buf;
      if (t.find_first_of(".eEn") == std::string::npos) t += ".0";
      return t;
    }
    case TomlValue::Type::String: {
      std::string out = "\"";
      for (char c : v.s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
          out += "\\n";
          continue;
        }
        out += c;
      }
      return out + "\"";
    }
    case TomlValue::Type::Array: {
      std::string out = "[";
      for (std::size_t k = 0; k < v.arr.size(); ++k) out += (k ? ", " : "") + to_toml(v.arr[k]);
      return out + "]";
    }
  }
  return "";
}

/// Section -> key -> value. Keys before any section header live in section "".
struct TomlDoc {
  std::map<std::string, std::map<std::string, TomlValue>> sections;

  std::string to_string() const {
    std::string out;
    for (const auto& [name, kv] : sections) {
      if (kv.empty()) continue;
      if (!name.empty()) out += "[" + name + "]\n";
      for (const auto& [k, v] : kv) out += k + " = " + to_toml(v) + "\n";
      out += "\n";
    }
    return out;
  }
};

namespace detail {

class TomlParser {
public:
  TomlParser(const std::string& text, int line) : t_(text), line_(line) {}

  TomlValue value() {
    skip_ws();
    if (pos_ >= t_.size()) fail("missing value");
    const char c = t_[pos_];
    if (c == '"') return string_value();
    if (c == '[') return array_value();
    return scalar_value();
  }

  void expect_end() {
    skip_ws();
    if (pos_ != t_.size()) fail("unexpected trailing text '" + t_.substr(pos_) + "'");
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < t_.size() && (t_[pos_] == ' ' || t_[pos_] == '\t' || t_[pos_] == '\n' || t_[pos_] == '\r')) ++pos_;
  }

  TomlValue string_value() {
    TomlValue v;
    v.type = TomlValue::Type::String;
    ++pos_;
    while (pos_ < t_.size() && t_[pos_] != '"') {
      char c = t_[pos_++];
      if (c == '\\') {
        if (pos_ >= t_.size()) fail("dangling escape");
        const char e = t_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      v.s += c;
    }
    if (pos_ >= t_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  TomlValue array_value() {
    TomlValue v;
    v.type = TomlValue::Type::Array;
    ++pos_;
    for (;;) {
      skip_ws();
      if (pos_ >= t_.size()) fail("unterminated array");
      if (t_[pos_] == ']') {
        ++pos_;
        return v;
      }
      v.arr.push_back(value());
      skip_ws();
      if (pos_ < t_.size() && t_[pos_] == ',') ++pos_;
      else if (pos_ < t_.size() && t_[pos_] != ']') fail("expected ',' or ']' in array");
    }
  }

  TomlValue scalar_value() {
    std::size_t end = pos_;
    while (end < t_.size() && t_[end] != ',' && t_[end] != ']' && t_[end] != ' ' && t_[end] != '\t' &&
           t_[end] != '\n' && t_[end] != '\r')
      ++end;
    std::string tok = t_.substr(pos_, end - pos_);
    pos_ = end;
    TomlValue v;
    if (tok == "true" || tok == "false") {
      v.type = TomlValue::Type::Bool;
      v.b = tok == "true";
      return v;
    }
    std::string clean;
    for (char c : tok)
      if (c != '_') clean += c;
    if (clean == "inf" || clean == "+inf" || clean == "-inf") {
      v.type = TomlValue::Type::Float;
      v.f = clean[0] == '-' ? -kInf : kInf;
      return v;
    }
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    char* endp = nullptr;
    errno = 0;
    if (is_float) {
      v.type = TomlValue::Type::Float;
      v.f = std::strtod(clean.c_str(), &endp);
    } else {
      v.type = TomlValue::Type::Int;
      v.i = std::strtoll(clean.c_str(), &endp, 10);
    }
    if (clean.empty() || endp != clean.c_str() + clean.size() || errno == ERANGE)
      fail("cannot parse value '" + tok + "'");
    return v;
  }

  std::string t_;
  std::size_t pos_ = 0;
  int line_;
};

inline std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"' && (k == 0 || line[k - 1] != '\\')) in_str = !in_str;
    if (line[k] == '#' && !in_str) return line.substr(0, k);
  }
  return line;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_str = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '"' && (k == 0 || s[k - 1] != '\\')) in_str = !in_str;
    if (in_str) continue;
    if (s[k] == '[') ++depth;
    if (s[k] == ']') --depth;
  }
  return depth;
}

}  // namespace detail

inline TomlDoc parse_toml(const std::string& text) {
  TomlDoc doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  doc.sections[section];
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (doc.sections.count(section) && !doc.sections[section].empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": duplicate section [" + section + "]");
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty() || key.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                           std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": invalid key '" + key + "'");
    std::string rhs = line.substr(eq + 1);
    const int start_line = line_no;
    while (detail::bracket_balance(rhs) > 0 && std::getline(in, raw)) {
      ++line_no;
      rhs += "\n" + detail::strip_comment(raw);
    }
    detail::TomlParser p(rhs, start_line);
    TomlValue v = p.value();
    p.expect_end();
    auto& kv = doc.sections[section];
    if (kv.count(key))
      throw ConfigError("config line " + std::to_string(start_line) + ": duplicate key '" + key + "'");
    kv.emplace(key, std::move(v));
  }
  return doc;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// FNV-1a 64-bit.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Typed access that records which keys were read, so leftovers can be reported as unknown.
class ConfigReader {
public:
  explicit ConfigReader(const TomlDoc& doc) : doc_(doc) {}

  bool has(const std::string& sec, const std::string& key) const {
    auto s = doc_.sections.find(sec);
    return s != doc_.sections.end() && s->second.count(key);
  }
  bool has_section(const std::string& sec) const {
    auto s = doc_.sections.find(sec);
    return s != doc_.sections.end() && !s->second.empty();
  }

  const TomlValue& raw(const std::string& sec, const std::string& key) {
    if (!has(sec, key)) throw ConfigError("missing required key [" + sec + "]." + key);
    used_.insert(sec + "." + key);
    return doc_.sections.at(sec).at(key);
  }

  double number(const std::string& sec, const std::string& key) {
    const TomlValue& v = raw(sec, key);
    if (!v.is_number()) throw ConfigError("[" + sec + "]." + key + " must be a number");
    return v.number();
  }
  double number(const std::string& sec, const std::string& key, double fallback) {
    return has(sec, key) ? number(sec, key) : fallback;
  }
  long long integer(const std::string& sec, const std::string& key) {
    const TomlValue& v = raw(sec, key);
    if (v.type != TomlValue::Type::Int) throw ConfigError("[" + sec + "]." + key + " must be an integer");
    return v.i;
  }
  long long integer(const std::string& sec, const std::string& key, long long fallback) {
    return has(sec, key) ? integer(sec, key) : fallback;
  }
  std::string string(const std::string& sec, const std::string& key) {
    const TomlValue& v = raw(sec, key);
    if (v.type != TomlValue::Type::String) throw ConfigError("[" + sec + "]." + key + " must be a string");
    return v.s;
  }
  std::string string(const std::string& sec, const std::string& key, const std::string& fallback) {
    return has(sec, key) ? string(sec, key) : fallback;
  }
  bool boolean(const std::string& sec, const std::string& key, bool fallback) {
    if (!has(sec, key)) return fallback;
    const TomlValue& v = raw(sec, key);
    if (v.type != TomlValue::Type::Bool) throw ConfigError("[" + sec + "]." + key + " must be true or false");
    return v.b;
  }
  /// A number or an array of numbers.
  std::vector<double> numbers(const std::string& sec, const std::string& key) {
    const TomlValue& v = raw(sec, key);
    return to_numbers(v, sec + "." + key);
  }
  std::vector<double> numbers(const std::string& sec, const std::string& key, std::vector<double> fallback) {
    return has(sec, key) ? numbers(sec, key) : fallback;
  }
  std::vector<std::string> strings(const std::string& sec, const std::string& key,
                                   std::vector<std::string> fallback) {
    if (!has(sec, key)) return fallback;
    const TomlValue& v = raw(sec, key);
    std::vector<std::string> out;
    if (v.type == TomlValue::Type::String) return {v.s};
    if (v.type != TomlValue::Type::Array) throw ConfigError("[" + sec + "]." + key + " must be a string array");
    for (const auto& e : v.arr) {
      if (e.type != TomlValue::Type::String) throw ConfigError("[" + sec + "]." + key + " must be a string array");
      out.push_back(e.s);
    }
    return out;
  }
  Vec vector(const std::string& sec, const std::string& key) {
    const auto xs = numbers(sec, key);
    return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  }
  /// Array of equal-length numeric arrays.
  Mat matrix(const std::string& sec, const std::string& key) {
    const TomlValue& v = raw(sec, key);
    if (v.type != TomlValue::Type::Array || v.arr.empty())
      throw ConfigError("[" + sec + "]." + key + " must be a non-empty array of arrays");
    const auto rows = v.arr.size();
    std::vector<std::vector<double>> data;
    for (const auto& r : v.arr) data.push_back(to_numbers(r, sec + "." + key));
    Mat m(rows, data[0].size());
    for (std::size_t i = 0; i < rows; ++i) {
      if (data[i].size() != data[0].size()) throw ConfigError("[" + sec + "]." + key + ": ragged matrix");
      for (std::size_t j = 0; j < data[i].size(); ++j) m(i, j) = data[i][j];
    }
    return m;
  }
  std::vector<std::vector<double>> nested_numbers(const std::string& sec, const std::string& key) {
    const TomlValue& v = raw(sec, key);
    if (v.type != TomlValue::Type::Array) throw ConfigError("[" + sec + "]." + key + " must be an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& r : v.arr) out.push_back(to_numbers(r, sec + "." + key));
    return out;
  }

  /// Throws on keys that no accessor consumed.
  void check_unknown() const {
    std::string unknown;
    for (const auto& [sec, kv] : doc_.sections)
      for (const auto& [key, v] : kv)
        if (!used_.count(sec + "." + key)) unknown += (unknown.empty() ? "" : ", ") + ("[" + sec + "]." + key);
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  }

private:
  static std::vector<double> to_numbers(const TomlValue& v, const std::string& what) {
    if (v.is_number()) return {v.number()};
    if (v.type != TomlValue::Type::Array) throw ConfigError(what + " must be a number or numeric array");
    std::vector<double> out;
    for (const auto& e : v.arr) {
      if (!e.is_number()) throw ConfigError(what + " must contain only numbers");
      out.push_back(e.number());
    }
    return out;
  }

  const TomlDoc& doc_;
  std::set<std::string> used_;
};

}  // namespace ldo::harness
