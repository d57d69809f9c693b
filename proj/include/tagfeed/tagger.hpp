#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tagfeed/config.hpp"
#include "tagfeed/error.hpp"
#include "tagfeed/preprocess.hpp"
#include "tagfeed/taxonomy.hpp"
#include "tagfeed/text.hpp"

namespace tagfeed {

struct DimensionStats {
  int attempts = 0;
  int correct = 0;
  double mean_duration = 0.0;  // meaningful only when attempts > 0

  std::optional<double> accuracy() const {
    if (attempts == 0) return std::nullopt;
    return static_cast<double>(correct) / attempts;
  }
};

struct StudentAggregate {
  std::string student_id;
  std::array<DimensionStats, kDifficultyLevels> by_difficulty{};
  std::array<DimensionStats, kKnowledgeAreaCount> by_knowledge{};
  std::array<DimensionStats, kAbilityDomainCount> by_ability{};

  const DimensionStats& difficulty(int level) const { return by_difficulty.at(static_cast<std::size_t>(level - 1)); }
  const DimensionStats& knowledge(KnowledgeArea a) const { return by_knowledge[static_cast<std::size_t>(a)]; }
  const DimensionStats& ability(AbilityDomain d) const { return by_ability[static_cast<std::size_t>(d)]; }
};

using AggregateMap = std::map<std::string, StudentAggregate>;

/// Per-student accuracy and mean duration by difficulty, knowledge area and ability domain.
/// Mean durations are summed in ascending order so the result does not depend on input order.
inline AggregateMap aggregate(std::span<const CleanAttempt> attempts) {
  AggregateMap out;
  std::map<std::string, std::array<std::vector<double>, kDifficultyLevels>> durations;
  for (const auto& a : attempts) {
    auto& agg = out[a.student_id];
    agg.student_id = a.student_id;
    auto bump = [&](DimensionStats& s) {
      ++s.attempts;
      s.correct += a.correct ? 1 : 0;
    };
    bump(agg.by_difficulty.at(static_cast<std::size_t>(a.difficulty - 1)));
    bump(agg.by_knowledge[static_cast<std::size_t>(a.knowledge)]);
    bump(agg.by_ability[static_cast<std::size_t>(a.ability)]);
    durations[a.student_id][static_cast<std::size_t>(a.difficulty - 1)].push_back(a.duration);
  }
  for (auto& [id, per_level] : durations) {
    auto& agg = out[id];
    for (std::size_t d = 0; d < kDifficultyLevels; ++d) {
      auto& v = per_level[d];
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      double sum = 0.0;
      for (double x : v) sum += x;
      agg.by_difficulty[d].mean_duration = sum / static_cast<double>(v.size());
    }
  }
  return out;
}

enum class SpeedClass { Fast, Slow, Neither };

inline constexpr std::string_view to_string(SpeedClass s) {
  switch (s) {
    case SpeedClass::Fast: return "Fast";
    case SpeedClass::Slow: return "Slow";
    case SpeedClass::Neither: return "Neither";
  }
  return "?";
}

using SpeedMap = std::map<std::string, SpeedClass>;

/// Number of students at each end of the ranking that receive an extreme class.
/// Cohorts up to the cutoff are split at the median; larger cohorts tag only the
/// configured extreme fraction at each end.
inline std::size_t speed_extreme_count(std::size_t cohort, const PipelineConfig& cfg) {
  if (cohort <= static_cast<std::size_t>(cfg.speed_cohort_cutoff)) return (cohort + 1) / 2;
  // The epsilon keeps products such as 0.1 * 30 from rounding up past an integer.
  return static_cast<std::size_t>(std::ceil(cfg.speed_extreme_fraction * static_cast<double>(cohort) - 1e-9));
}

/// Ranks the students with at least one attempt at `level` by mean duration (ties by
/// student id) and assigns Fast / Slow / Neither.
inline SpeedMap classify_speed(const AggregateMap& aggregates, int level, const PipelineConfig& cfg) {
  struct Entry {
    double mean;
    const std::string* id;
  };
  std::vector<Entry> cohort;
  for (const auto& [id, agg] : aggregates) {
    const auto& s = agg.difficulty(level);
    if (s.attempts > 0) cohort.push_back({s.mean_duration, &id});
  }
  std::sort(cohort.begin(), cohort.end(), [](const Entry& a, const Entry& b) {
    if (a.mean != b.mean) return a.mean < b.mean;
    return *a.id < *b.id;
  });

  SpeedMap out;
  const std::size_t n = cohort.size();
  const std::size_t k = speed_extreme_count(n, cfg);
  const bool median_split = n <= static_cast<std::size_t>(cfg.speed_cohort_cutoff);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rank = i + 1;
    SpeedClass cls = SpeedClass::Neither;
    if (rank <= k) {
      cls = SpeedClass::Fast;
    } else if (median_split || rank > n - k) {
      cls = SpeedClass::Slow;
    }
    out.emplace(*cohort[i].id, cls);
  }
  return out;
}

/// Speed classes for every difficulty level; absent entries mean no attempts at that level.
using SpeedProfile = std::array<std::optional<SpeedClass>, kDifficultyLevels>;

inline std::optional<AccuracyBand> accuracy_band(double accuracy, const PipelineConfig& cfg) {
  if (accuracy > cfg.adequate_threshold) return AccuracyBand::Adequate;
  if (accuracy < cfg.struggling_threshold) return AccuracyBand::Struggling;
  return std::nullopt;
}

namespace detail {

inline std::optional<AccuracyBand> band_if_enough(const DimensionStats& s, const PipelineConfig& cfg) {
  if (s.attempts < cfg.min_attempts_per_dimension) return std::nullopt;
  return accuracy_band(*s.accuracy(), cfg);
}

}  // namespace detail

inline TagSet performance_tags(const StudentAggregate& agg, const SpeedProfile& speed, const PipelineConfig& cfg) {
  TagSet tags;
  for (int level = 1; level <= 3; ++level) {
    auto band = detail::band_if_enough(agg.difficulty(level), cfg);
    const auto& cls = speed[static_cast<std::size_t>(level - 1)];
    if (!band || !cls || *cls == SpeedClass::Neither) continue;
    tags.set(TagId::performance(level, *band, *cls == SpeedClass::Fast ? SpeedBand::Fast : SpeedBand::Slow));
  }
  return tags;
}

inline TagSet knowledge_tags(const StudentAggregate& agg, const PipelineConfig& cfg) {
  TagSet tags;
  for (auto area : kAllKnowledgeAreas) {
    if (auto band = detail::band_if_enough(agg.knowledge(area), cfg)) {
      tags.set(TagId::knowledge(area, *band == AccuracyBand::Adequate));
    }
  }
  return tags;
}

inline TagSet ability_tags(const StudentAggregate& agg, const PipelineConfig& cfg) {
  TagSet tags;
  for (auto domain : kAllAbilityDomains) {
    if (auto band = detail::band_if_enough(agg.ability(domain), cfg)) {
      tags.set(TagId::ability(domain, *band == AccuracyBand::Adequate));
    }
  }
  return tags;
}

inline TagSet tag_student(const StudentAggregate& agg, const SpeedProfile& speed, const PipelineConfig& cfg) {
  TagSet tags = performance_tags(agg, speed, cfg);
  tags |= knowledge_tags(agg, cfg);
  tags |= ability_tags(agg, cfg);
  return tags;
}

/// The student_tag dataset: student id to 34-flag vector, ordered by id.
using StudentTagTable = std::map<std::string, TagSet>;

/// Aggregates, runs the cohort-wide speed ranking once per level, then tags each student.
inline StudentTagTable tag_cohort(std::span<const CleanAttempt> attempts, const PipelineConfig& cfg) {
  auto aggregates = aggregate(attempts);
  std::array<SpeedMap, kDifficultyLevels> speeds;
  for (int level = 1; level <= 3; ++level) speeds[level - 1] = classify_speed(aggregates, level, cfg);

  StudentTagTable out;
  for (const auto& [id, agg] : aggregates) {
    SpeedProfile profile;
    for (std::size_t d = 0; d < kDifficultyLevels; ++d) {
      if (auto it = speeds[d].find(id); it != speeds[d].end()) profile[d] = it->second;
    }
    out.emplace(id, tag_student(agg, profile, cfg));
  }
  return out;
}

struct TagPipelineResult {
  StudentTagTable tags;
  UnmappedReport unmapped;
  std::size_t input_records = 0;
  std::size_t retained_records = 0;
};

/// Raw records through dedup, mapping and tagging.
inline TagPipelineResult run_tag_pipeline(std::span<const AttemptRecord> records, const CategoryMapping& mapping,
                                          const PipelineConfig& cfg) {
  TagPipelineResult result;
  result.input_records = records.size();
  auto mapped = preprocess(records, mapping);
  result.retained_records = mapped.attempts.size();
  result.unmapped = std::move(mapped.unmapped);
  result.tags = tag_cohort(mapped.attempts, cfg);
  return result;
}

inline std::string student_tag_header() {
  std::string out = "student_id";
  for (auto id : all_tags()) out += "," + id.name();
  return out;
}

/// One row per student: id followed by 34 comma-separated 0/1 flags, after a header row.
inline void write_student_tags(std::ostream& out, const StudentTagTable& table) {
  out << student_tag_header() << '\n';
  for (const auto& [id, tags] : table) out << text::quote_field(id) << ',' << tags.to_csv() << '\n';
}

/// Reads the student_tag file. The header row is optional. Throws Error(MalformedRow)
/// for a row without exactly 34 flags or with a flag other than 0/1.
inline StudentTagTable read_student_tags(std::istream& in) {
  StudentTagTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) line = text::strip_bom(std::move(line));
    if (text::trim(line).empty()) continue;
    auto fields = text::split_record(line);
    auto where = "student_tag line " + std::to_string(line_no);
    if (!fields) throw Error(ErrorCode::MalformedRow, where + ": unterminated quote");
    if (line_no == 1 && text::trim((*fields)[0]) == "student_id") continue;
    if (fields->size() != kTagCount + 1) {
      throw Error(ErrorCode::MalformedRow, where + ": expected 34 flags, found " + std::to_string(fields->size() - 1));
    }
    TagSet tags;
    for (std::size_t i = 0; i < kTagCount; ++i) {
      auto f = text::trim((*fields)[i + 1]);
      if (f == "1") {
        tags.set(TagId::from_index(i));
      } else if (f != "0") {
        throw Error(ErrorCode::MalformedRow, where + ": flag " + TagId::from_index(i).name() + " is not 0 or 1");
      }
    }
    auto id = std::string(text::trim((*fields)[0]));
    if (id.empty()) throw Error(ErrorCode::MalformedRow, where + ": empty student id");
    table.insert_or_assign(std::move(id), tags);
  }
  return table;
}

}  // namespace tagfeed
