#pragma once

// Small text helpers shared by the file readers: delimited-record splitting
// with RFC 4180 quoting, strict numeric parsing and flat key=value files.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tagfeed/error.hpp"

namespace tagfeed::text {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string strip_bom(std::string line) {
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  return line;
}

/// Splits one record. Quoted fields may contain the delimiter and doubled quotes.
/// Returns nullopt on an unterminated quote.
inline std::optional<std::vector<std::string>> split_record(std::string_view line, char delim = ',') {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_start = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
      continue;
    }
    if (c == '"' && field_start) {
      quoted = true;
      field_start = false;
    } else if (c == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
      field_start = true;
    } else if (c == '\r' && i + 1 == line.size()) {
      // tolerate CRLF
    } else {
      cur.push_back(c);
      field_start = false;
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string quote_field(std::string_view field, char delim = ',') {
  if (field.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::vector<double> parse_double_list(std::string_view s) {
  std::vector<double> out;
  auto fields = split_record(s, ',');
  if (!fields) return out;
  for (const auto& f : *fields) {
    auto v = parse_double(f);
    if (!v) return {};
    out.push_back(*v);
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Flat "key = value" entries; '#' starts a comment line. Later keys override earlier ones.
struct KeyValueFile {
  std::map<std::string, std::string> entries;
  std::vector<std::string> errors;

  std::optional<std::string> get(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }
};

inline KeyValueFile parse_key_values(std::string_view content) {
  KeyValueFile kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    auto raw = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      kv.errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    kv.entries[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

}  // namespace tagfeed::text
