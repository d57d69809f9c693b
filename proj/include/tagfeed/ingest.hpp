#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagfeed/error.hpp"
#include "tagfeed/text.hpp"

namespace tagfeed {

/// One raw answer event as exported by the learning platform.
struct AttemptRecord {
  std::string student_id;
  std::string question_id;
  bool correct = false;
  int difficulty = 1;  // 1 easy, 2 medium, 3 difficult
  std::string knowledge_raw;
  std::string ability_raw;
  double duration = 0.0;  // seconds

  friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

struct Rejection {
  std::size_t line = 0;  // 1-based, counting the header
  std::string reason;

  friend bool operator==(const Rejection&, const Rejection&) = default;
};

/// accepted + rejected equals the number of non-blank data lines.
struct IngestReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<Rejection> rejections;

  friend bool operator==(const IngestReport&, const IngestReport&) = default;
};

struct IngestResult {
  std::vector<AttemptRecord> records;
  IngestReport report;
};

inline constexpr std::array<const char*, 7> kAttemptColumns{
    "student_id", "question_id", "correct", "difficulty", "knowledge_raw", "ability_raw", "duration"};

namespace detail {

struct RawFields {
  std::string student_id, question_id, correct, difficulty, knowledge_raw, ability_raw, duration;
};

// Returns the reject reason, or nullopt with `out` filled.
inline std::optional<std::string> build_record(const RawFields& f, AttemptRecord& out) {
  if (text::trim(f.student_id).empty()) return "empty student_id";
  if (text::trim(f.question_id).empty()) return "empty question_id";
  auto correct = text::parse_int(f.correct);
  if (!correct) return "correct is not an integer";
  if (*correct != 0 && *correct != 1) return "correct out of range";
  auto difficulty = text::parse_int(f.difficulty);
  if (!difficulty) return "difficulty is not an integer";
  if (*difficulty < 1 || *difficulty > 3) return "difficulty out of range";
  auto duration = text::parse_double(f.duration);
  if (!duration) return "duration is not numeric";
  if (*duration < 0.0) return "negative duration";

  out.student_id = std::string(text::trim(f.student_id));
  out.question_id = std::string(text::trim(f.question_id));
  out.correct = *correct == 1;
  out.difficulty = static_cast<int>(*difficulty);
  out.knowledge_raw = std::string(text::trim(f.knowledge_raw));
  out.ability_raw = std::string(text::trim(f.ability_raw));
  out.duration = *duration;
  return std::nullopt;
}

inline void accept_or_reject(IngestResult& result, std::size_t line_no, const RawFields& fields) {
  AttemptRecord rec;
  if (auto reason = build_record(fields, rec)) {
    ++result.report.rejected;
    result.report.rejections.push_back({line_no, std::move(*reason)});
  } else {
    ++result.report.accepted;
    result.records.push_back(std::move(rec));
  }
}

}  // namespace detail

/// Comma-delimited attempts with a header row. Columns may appear in any order and
/// extra columns are ignored. Throws Error(MissingColumn) if a required column is absent.
inline IngestResult parse_attempts_csv(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::array<std::size_t, 7>> index;

  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) line = text::strip_bom(std::move(line));
    if (text::trim(line).empty()) continue;
    auto fields = text::split_record(line);
    if (!index) {
      if (!fields) throw Error(ErrorCode::MalformedRow, "unterminated quote in header");
      std::array<std::size_t, 7> idx{};
      for (std::size_t c = 0; c < kAttemptColumns.size(); ++c) {
        bool found = false;
        for (std::size_t i = 0; i < fields->size(); ++i) {
          if (text::trim((*fields)[i]) == kAttemptColumns[c]) {
            idx[c] = i;
            found = true;
            break;
          }
        }
        if (!found) {
          throw Error(ErrorCode::MissingColumn,
                      std::string("header lacks required column '") + kAttemptColumns[c] + "'");
        }
      }
      index = idx;
      continue;
    }
    if (!fields) {
      ++result.report.rejected;
      result.report.rejections.push_back({line_no, "unterminated quote"});
      continue;
    }
    const auto& idx = *index;
    std::size_t needed = 0;
    for (auto i : idx) needed = std::max(needed, i + 1);
    if (fields->size() < needed) {
      ++result.report.rejected;
      result.report.rejections.push_back({line_no, "too few fields"});
      continue;
    }
    const auto& v = *fields;
    detail::accept_or_reject(result, line_no,
                             {v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]], v[idx[4]], v[idx[5]], v[idx[6]]});
  }
  if (!index) throw Error(ErrorCode::MissingColumn, "missing header row");
  return result;
}

/// One JSON object per line with the same field names as the CSV header.
/// Numeric fields may be given as numbers or strings; `correct` also accepts booleans.
inline IngestResult parse_attempts_jsonl(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      ++result.report.rejected;
      result.report.rejections.push_back({line_no, "not a JSON object"});
      continue;
    }
    std::optional<std::string> missing;
    auto field = [&](const char* name) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end() || it->is_null()) {
        if (!missing) missing = std::string("missing field '") + name + "'";
        return {};
      }
      if (it->is_string()) return it->get<std::string>();
      if (it->is_boolean()) return it->get<bool>() ? "1" : "0";
      return it->dump();
    };
    detail::RawFields raw{field("student_id"),    field("question_id"), field("correct"),
                          field("difficulty"),    field("knowledge_raw"), field("ability_raw"),
                          field("duration")};
    if (missing) {
      ++result.report.rejected;
      result.report.rejections.push_back({line_no, *missing});
      continue;
    }
    detail::accept_or_reject(result, line_no, raw);
  }
  return result;
}

/// Chooses the JSON-lines reader for .jsonl/.ndjson paths, CSV otherwise.
inline IngestResult load_attempts(const std::string& path) {
  auto content = text::read_file(path);
  std::istringstream in(content);
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".jsonl") || ends_with(".ndjson")) return parse_attempts_jsonl(in);
  return parse_attempts_csv(in);
}

inline std::string attempts_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kAttemptColumns.size(); ++i) {
    if (i) out.push_back(',');
    out += kAttemptColumns[i];
  }
  return out;
}

// Shortest representation that parses back to the same double.
inline std::string format_duration(double seconds) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), seconds);
  return std::string(buf.data(), ptr);
}

inline void write_attempts_csv(std::ostream& out, const std::vector<AttemptRecord>& records) {
  out << attempts_csv_header() << '\n';
  for (const auto& r : records) {
    out << text::quote_field(r.student_id) << ',' << text::quote_field(r.question_id) << ','
        << (r.correct ? 1 : 0) << ',' << r.difficulty << ',' << text::quote_field(r.knowledge_raw)
        << ',' << text::quote_field(r.ability_raw) << ',' << format_duration(r.duration) << '\n';
  }
}

}  // namespace tagfeed
