#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tagfeed/error.hpp"
#include "tagfeed/tagger.hpp"
#include "tagfeed/taxonomy.hpp"
#include "tagfeed/text.hpp"

namespace tagfeed {

enum class ReportSection : std::uint8_t {
  Overview,
  BasicAnalysis,
  KnowledgeCategoryAnalysis,
  AbilityAnalysis,
  LearningStrategies,
  Summary,
};

inline constexpr std::size_t kReportSectionCount = 6;

inline constexpr std::array<std::string_view, kReportSectionCount> kReportSectionTitles{
    "Overview",         "Basic Analysis",
    "Knowledge Category Analysis", "Ability Analysis",
    "Learning Strategies and Recommendations", "Summary"};

/// Which tag category feeds a section, if any.
inline constexpr std::optional<TagCategory> section_tag_category(ReportSection s) {
  switch (s) {
    case ReportSection::BasicAnalysis: return TagCategory::Performance;
    case ReportSection::KnowledgeCategoryAnalysis: return TagCategory::Knowledge;
    case ReportSection::AbilityAnalysis: return TagCategory::Ability;
    default: return std::nullopt;
  }
}

struct PromptSection {
  std::string title;
  std::string instruction;

  friend bool operator==(const PromptSection&, const PromptSection&) = default;
};

/// Six sections in fixed role order plus global directives. Titles and wording can be
/// replaced (e.g. for another language); the role of each position cannot.
struct PromptTemplate {
  std::string preamble;
  std::array<PromptSection, kReportSectionCount> sections;
  std::string tags_heading;       // introduces the tag list inside an analysis section
  std::string no_tags_note;       // analysis section whose category has no set tag
  std::string insufficient_data;  // every section, when no tag is set at all

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

inline PromptTemplate default_template() {
  PromptTemplate t;
  t.preamble =
      "You are an experienced primary school mathematics teacher writing a personalized learning "
      "feedback report for one of your students, based on learning characteristics identified from "
      "the student's recent practice in an adaptive learning system.\n"
      "Style requirements:\n"
      "- Address the student directly as \"you\" throughout the report.\n"
      "- Keep the tone constructive, warm and encouraging; recognise effort and progress.\n"
      "- Avoid overly critical or negative remarks. Present every difficulty as an opportunity to "
      "grow, paired with a concrete next step.\n"
      "- Use simple, clear language that a primary school student and their parents can follow.\n"
      "- Base every statement only on the learning characteristics listed below; do not invent "
      "scores or other data.\n"
      "Write the report with exactly the following six sections, in this order, using the section "
      "titles as headings.";
  t.sections = {{
      {std::string(kReportSectionTitles[0]),
       "Give a short, friendly overview of your learning performance in this period, highlighting "
       "your most important strengths before any area to work on."},
      {std::string(kReportSectionTitles[1]),
       "Explain how accurately and how quickly you answered easy, medium and difficult questions, "
       "using the characteristics below. Relate speed and accuracy to each other where helpful."},
      {std::string(kReportSectionTitles[2]),
       "Discuss your command of the mathematics content areas using the characteristics below, "
       "celebrating strong areas and gently pointing out areas that need more practice."},
      {std::string(kReportSectionTitles[3]),
       "Describe your mathematical abilities using the characteristics below, explaining what each "
       "one means for your everyday learning."},
      {std::string(kReportSectionTitles[4]),
       "Offer three to five specific, practical learning strategies that build on your strengths "
       "and address the areas identified above. Make each suggestion something you can start this "
       "week."},
      {std::string(kReportSectionTitles[5]),
       "Close with a brief, encouraging summary that restates your key strengths and the main next "
       "step, and expresses confidence in your continued progress."},
  }};
  t.tags_heading = "Learning characteristics identified for this section:";
  t.no_tags_note =
      "No learning characteristics were triggered in this category; mention briefly that there is "
      "not yet enough evidence for a detailed analysis here.";
  t.insufficient_data =
      "There is insufficient data to identify learning characteristics for this student; keep this "
      "section short, encourage more practice and do not speculate.";
  return t;
}

namespace detail {

inline std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  while (!s.empty() && s.front() == '\n') s.erase(s.begin());
  return s;
}

}  // namespace detail

/// Template asset format: blocks introduced by marker lines
///   [[preamble]]  [[section: <title>]] (six times)  [[tags_heading]]  [[no_tags]]  [[insufficient_data]]
/// Lines starting with "##!" are comments. Throws Error(InvalidTemplate).
inline PromptTemplate parse_template(std::string_view content) {
  PromptTemplate t;
  std::size_t section_count = 0;
  std::string* target = nullptr;
  std::vector<std::string> seen;
  auto flush_target = [&] {
    if (target) *target = detail::strip_trailing_newlines(std::move(*target));
  };

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    std::string line(content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("##!", 0) == 0) continue;
    auto trimmed = std::string(text::trim(line));
    if (trimmed.size() > 4 && trimmed.rfind("[[", 0) == 0 && trimmed.substr(trimmed.size() - 2) == "]]") {
      flush_target();
      auto marker = std::string(text::trim(std::string_view(trimmed).substr(2, trimmed.size() - 4)));
      if (marker.rfind("section:", 0) == 0) {
        if (section_count == kReportSectionCount) {
          throw Error(ErrorCode::InvalidTemplate, "template defines more than six sections");
        }
        auto title = std::string(text::trim(std::string_view(marker).substr(8)));
        if (title.empty()) throw Error(ErrorCode::InvalidTemplate, "empty section title at line " + std::to_string(line_no));
        t.sections[section_count].title = title;
        target = &t.sections[section_count].instruction;
        ++section_count;
        continue;
      }
      if (std::find(seen.begin(), seen.end(), marker) != seen.end()) {
        throw Error(ErrorCode::InvalidTemplate, "duplicate marker [[" + marker + "]]");
      }
      seen.push_back(marker);
      if (marker == "preamble") target = &t.preamble;
      else if (marker == "tags_heading") target = &t.tags_heading;
      else if (marker == "no_tags") target = &t.no_tags_note;
      else if (marker == "insufficient_data") target = &t.insufficient_data;
      else throw Error(ErrorCode::InvalidTemplate, "unknown marker [[" + marker + "]] at line " + std::to_string(line_no));
      continue;
    }
    if (!target) {
      if (trimmed.empty()) continue;
      throw Error(ErrorCode::InvalidTemplate, "text before the first marker at line " + std::to_string(line_no));
    }
    if (!target->empty()) target->push_back('\n');
    target->append(line);
  }
  flush_target();
  if (section_count != kReportSectionCount) {
    throw Error(ErrorCode::InvalidTemplate,
                "template must define exactly six sections, found " + std::to_string(section_count));
  }
  for (const char* required : {"preamble", "tags_heading", "no_tags", "insufficient_data"}) {
    if (std::find(seen.begin(), seen.end(), required) == seen.end()) {
      throw Error(ErrorCode::InvalidTemplate, std::string("missing marker [[") + required + "]]");
    }
  }
  return t;
}

inline std::string serialize_template(const PromptTemplate& t) {
  std::ostringstream out;
  out << "##! Prompt template. Marker lines start blocks; section order is fixed.\n";
  out << "[[preamble]]\n" << t.preamble << "\n\n";
  for (const auto& s : t.sections) out << "[[section: " << s.title << "]]\n" << s.instruction << "\n\n";
  out << "[[tags_heading]]\n" << t.tags_heading << "\n\n";
  out << "[[no_tags]]\n" << t.no_tags_note << "\n\n";
  out << "[[insufficient_data]]\n" << t.insufficient_data << "\n";
  return out.str();
}

inline PromptTemplate load_template(const std::string& path) { return parse_template(text::read_file(path)); }

/// Looks up one student in the student_tag dataset. Throws Error(UnknownStudent).
inline TagSet get_student_tags(const StudentTagTable& dataset, const std::string& student_id) {
  auto it = dataset.find(student_id);
  if (it == dataset.end()) throw Error(ErrorCode::UnknownStudent, "unknown student: " + student_id);
  return it->second;
}

/// Builds the chat prompt: preamble, then the six sections in order. Each analysis
/// section lists the descriptions of its set tags. Throws Error(InvalidTagSet) if the
/// tag set violates a mutual exclusion.
inline std::string render_prompt(const TagSet& tags, const PromptTemplate& tmpl) {
  auto violations = tags.violations();
  if (!violations.empty()) {
    std::string msg = "tag set violates mutual exclusion:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error(ErrorCode::InvalidTagSet, msg);
  }

  const bool nothing_set = tags.empty();
  std::string out = tmpl.preamble;
  out += "\n";
  for (std::size_t i = 0; i < kReportSectionCount; ++i) {
    const auto& section = tmpl.sections[i];
    out += "\n## " + std::to_string(i + 1) + ". " + section.title + "\n";
    out += section.instruction + "\n";
    if (nothing_set) {
      out += tmpl.insufficient_data + "\n";
      continue;
    }
    auto category = section_tag_category(static_cast<ReportSection>(i));
    if (!category) continue;
    std::vector<TagId> in_section;
    for (auto id : tags.set_tags()) {
      if (id.category() == *category) in_section.push_back(id);
    }
    if (in_section.empty()) {
      out += tmpl.no_tags_note + "\n";
      continue;
    }
    out += tmpl.tags_heading + "\n";
    for (auto id : in_section) {
      out += "- ";
      out += tag_description(id);
      out += "\n";
    }
  }
  return out;
}

}  // namespace tagfeed
