#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tagfeed/error.hpp"
#include "tagfeed/text.hpp"

namespace tagfeed::survey {

enum class Dimension : std::uint8_t { Understanding, Practicality, Motivation, Clarity, Organization };

inline constexpr std::size_t kDimensionCount = 5;
inline constexpr int kMaxScore = 10;
inline constexpr int kMaxTotal = kMaxScore * static_cast<int>(kDimensionCount);

inline constexpr std::array<std::string_view, kDimensionCount> kDimensionNames{
    "Understanding Level", "Practicality", "Motivation effect", "Clarity", "Organizational structure"};

inline constexpr std::string_view to_string(Dimension d) { return kDimensionNames[static_cast<std::size_t>(d)]; }

/// One questionnaire: five integer ratings 0..10 and optional free-text advice.
struct SurveyResponse {
  std::string respondent_id;
  std::array<int, kDimensionCount> scores{};
  std::string advice;

  int total() const { return std::accumulate(scores.begin(), scores.end(), 0); }

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

struct FilterResult {
  std::vector<SurveyResponse> valid;
  std::vector<SurveyResponse> discarded_low;
  std::vector<SurveyResponse> discarded_perfect;
};

inline constexpr int kDefaultLowTotalThreshold = 5;

/// Perfect totals (50) are treated as non-genuine; totals at or below the threshold as
/// unjustifiably low. The three outputs partition the input and keep its order.
inline FilterResult filter_responses(const std::vector<SurveyResponse>& responses,
                                     int low_total_threshold = kDefaultLowTotalThreshold) {
  FilterResult out;
  for (const auto& r : responses) {
    auto total = r.total();
    if (total == kMaxTotal) out.discarded_perfect.push_back(r);
    else if (total <= low_total_threshold) out.discarded_low.push_back(r);
    else out.valid.push_back(r);
  }
  return out;
}

struct DimensionSummary {
  Dimension dimension = Dimension::Understanding;
  std::size_t n = 0;
  double mean = 0, median = 0, q1 = 0, q3 = 0, iqr = 0;
  double lower_fence = 0, upper_fence = 0;      // Q1 - 1.5 IQR, Q3 + 1.5 IQR
  double lower_whisker = 0, upper_whisker = 0;  // most extreme values inside the fences
  double min = 0, max = 0;
  std::vector<double> outliers;  // ascending
};

namespace detail {

inline double median_of_sorted(const double* first, std::size_t n) {
  if (n % 2 == 1) return first[n / 2];
  return (first[n / 2 - 1] + first[n / 2]) / 2.0;
}

}  // namespace detail

/// Box-plot statistics for one sample. Quartiles are medians of the lower and upper
/// halves, excluding the middle value when n is odd; a single value is its own quartiles.
inline DimensionSummary summarize_values(std::vector<double> values, Dimension dimension = Dimension::Understanding) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to summarize");
  std::sort(values.begin(), values.end());
  DimensionSummary s;
  s.dimension = dimension;
  s.n = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  s.median = detail::median_of_sorted(values.data(), s.n);
  const std::size_t half = s.n / 2;
  if (half == 0) {
    s.q1 = s.q3 = s.median;
  } else {
    s.q1 = detail::median_of_sorted(values.data(), half);
    s.q3 = detail::median_of_sorted(values.data() + (s.n - half), half);
  }
  s.iqr = s.q3 - s.q1;
  s.lower_fence = s.q1 - 1.5 * s.iqr;
  s.upper_fence = s.q3 + 1.5 * s.iqr;
  s.min = values.front();
  s.max = values.back();
  s.lower_whisker = s.max;
  s.upper_whisker = s.min;
  for (double v : values) {
    if (v < s.lower_fence || v > s.upper_fence) {
      s.outliers.push_back(v);
    } else {
      s.lower_whisker = std::min(s.lower_whisker, v);
      s.upper_whisker = std::max(s.upper_whisker, v);
    }
  }
  return s;
}

/// Per-dimension summaries. Throws Error(EmptyInput) for no responses.
inline std::array<DimensionSummary, kDimensionCount> summarize(const std::vector<SurveyResponse>& valid) {
  if (valid.empty()) throw Error(ErrorCode::EmptyInput, "no valid responses to summarize");
  std::array<DimensionSummary, kDimensionCount> out;
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    std::vector<double> values;
    values.reserve(valid.size());
    for (const auto& r : valid) values.push_back(r.scores[d]);
    out[d] = summarize_values(std::move(values), static_cast<Dimension>(d));
  }
  return out;
}

/// CSV with columns respondent_id,u,p,m,c,o[,advice]; the header row is optional.
/// Throws Error(MalformedRow) naming the first bad line.
inline std::vector<SurveyResponse> read_survey_csv(std::istream& in) {
  std::vector<SurveyResponse> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) line = text::strip_bom(std::move(line));
    if (text::trim(line).empty()) continue;
    auto fields = text::split_record(line);
    auto where = "survey line " + std::to_string(line_no);
    if (!fields) throw Error(ErrorCode::MalformedRow, where + ": unterminated quote");
    if (line_no == 1 && text::trim((*fields)[0]) == "respondent_id") continue;
    if (fields->size() < 1 + kDimensionCount) throw Error(ErrorCode::MalformedRow, where + ": expected at least 6 fields");
    SurveyResponse r;
    r.respondent_id = std::string(text::trim((*fields)[0]));
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
      auto v = text::parse_int((*fields)[d + 1]);
      if (!v || *v < 0 || *v > kMaxScore) {
        throw Error(ErrorCode::MalformedRow, where + ": score for " + std::string(kDimensionNames[d]) + " must be an integer 0-10");
      }
      r.scores[d] = static_cast<int>(*v);
    }
    for (std::size_t i = 1 + kDimensionCount; i < fields->size(); ++i) {
      if (i > 1 + kDimensionCount) r.advice += ',';
      r.advice += (*fields)[i];
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_survey_csv(std::ostream& out, const std::vector<SurveyResponse>& responses) {
  out << "respondent_id,u,p,m,c,o,advice\n";
  for (const auto& r : responses) {
    out << text::quote_field(r.respondent_id);
    for (int s : r.scores) out << ',' << s;
    out << ',' << text::quote_field(r.advice) << '\n';
  }
}

inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline void write_summary_csv(std::ostream& out, const std::array<DimensionSummary, kDimensionCount>& summaries) {
  out << "dimension,n,mean,median,q1,q3,iqr,lower_whisker,upper_whisker,min,max,outliers\n";
  for (const auto& s : summaries) {
    out << text::quote_field(to_string(s.dimension)) << ',' << s.n << ',' << format_number(s.mean) << ','
        << format_number(s.median) << ',' << format_number(s.q1) << ',' << format_number(s.q3) << ','
        << format_number(s.iqr) << ',' << format_number(s.lower_whisker) << ','
        << format_number(s.upper_whisker) << ',' << format_number(s.min) << ',' << format_number(s.max) << ',';
    for (std::size_t i = 0; i < s.outliers.size(); ++i) {
      if (i) out << ';';
      out << format_number(s.outliers[i]);
    }
    out << '\n';
  }
}

/// Box plot of the five dimensions on a 0-10 axis, as a standalone SVG document.
inline std::string render_boxplot_svg(const std::array<DimensionSummary, kDimensionCount>& summaries) {
  constexpr double width = 720, height = 420, left = 60, right = 20, top = 30, bottom = 70;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto y = [&](double v) { return top + plot_h * (1.0 - v / kMaxScore); };
  const double slot = plot_w / kDimensionCount, box_w = slot * 0.5;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int t = 0; t <= kMaxScore; t += 2) {
    svg << "<line x1=\"" << left << "\" x2=\"" << width - right << "\" y1=\"" << y(t) << "\" y2=\"" << y(t)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y(t) + 4 << "\" text-anchor=\"end\">" << t << "</text>\n";
  }
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    const double x0 = cx - box_w / 2;
    svg << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << y(s.upper_whisker) << "\" y2=\"" << y(s.q3)
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << y(s.q1) << "\" y2=\"" << y(s.lower_whisker)
        << "\" stroke=\"black\"/>\n";
    for (double w : {s.lower_whisker, s.upper_whisker}) {
      svg << "<line x1=\"" << cx - box_w / 4 << "\" x2=\"" << cx + box_w / 4 << "\" y1=\"" << y(w) << "\" y2=\""
          << y(w) << "\" stroke=\"black\"/>\n";
    }
    svg << "<rect x=\"" << x0 << "\" y=\"" << y(s.q3) << "\" width=\"" << box_w << "\" height=\""
        << std::max(1.0, y(s.q1) - y(s.q3)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << x0 << "\" x2=\"" << x0 + box_w << "\" y1=\"" << y(s.median) << "\" y2=\"" << y(s.median)
        << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    for (double o : s.outliers) {
      svg << "<circle cx=\"" << cx << "\" cy=\"" << y(o) << "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
    }
    svg << "<text x=\"" << cx << "\" y=\"" << height - bottom + 20 << "\" text-anchor=\"middle\">"
        << to_string(s.dimension) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tagfeed::survey
