#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tagfeed/error.hpp"
#include "tagfeed/ingest.hpp"
#include "tagfeed/taxonomy.hpp"
#include "tagfeed/text.hpp"

namespace tagfeed {

/// An attempt after dedup and category consolidation. duration > 0.
struct CleanAttempt {
  std::string student_id;
  std::string question_id;
  bool correct = false;
  int difficulty = 1;
  KnowledgeArea knowledge = KnowledgeArea::SpeedAndTime;
  AbilityDomain ability = AbilityDomain::PracticalApplication;
  double duration = 0.0;

  friend bool operator==(const CleanAttempt&, const CleanAttempt&) = default;
};

/// Picks one record among candidates that share the maximal duration: a correct
/// answer is preferred, then the one latest in input order. `candidates` must be
/// non-empty and in input order.
inline const AttemptRecord& tie_break(std::span<const AttemptRecord* const> candidates) {
  const AttemptRecord* best = candidates.front();
  for (const AttemptRecord* r : candidates.subspan(1)) {
    if (r->correct >= best->correct) best = r;
  }
  return *best;
}

/// Keeps the longest attempt per (student, question). Pairs whose attempts all
/// have zero duration are dropped. Output follows the input position of each
/// retained record.
inline std::vector<AttemptRecord> dedup_attempts(std::span<const AttemptRecord> records) {
  struct Group {
    double max_duration = -1.0;
    std::vector<std::size_t> at_max;
  };
  std::unordered_map<std::string, Group> groups;
  groups.reserve(records.size());
  std::vector<std::string> order;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    // '\x1f' cannot appear in a trimmed identifier read from text.
    std::string key = r.student_id + '\x1f' + r.question_id;
    auto [it, inserted] = groups.try_emplace(std::move(key));
    auto& g = it->second;
    if (r.duration > g.max_duration) {
      g.max_duration = r.duration;
      g.at_max.assign(1, i);
    } else if (r.duration == g.max_duration) {
      g.at_max.push_back(i);
    }
  }

  std::vector<std::size_t> kept;
  kept.reserve(groups.size());
  std::vector<const AttemptRecord*> candidates;
  for (const auto& [key, g] : groups) {
    if (g.max_duration <= 0.0) continue;
    candidates.clear();
    for (auto i : g.at_max) candidates.push_back(&records[i]);
    const auto& winner = tie_break(candidates);
    kept.push_back(static_cast<std::size_t>(&winner - records.data()));
  }
  std::sort(kept.begin(), kept.end());

  std::vector<AttemptRecord> out;
  out.reserve(kept.size());
  for (auto i : kept) out.push_back(records[i]);
  return out;
}

/// Raw label to consolidated category, one table per taxonomy dimension.
struct CategoryMapping {
  std::map<std::string, KnowledgeArea> knowledge;
  std::map<std::string, AbilityDomain> ability;
};

struct MappingLoad {
  std::vector<std::string> warnings;
};

namespace detail {

template <typename Enum, typename Parse>
void load_mapping_table(std::string_view content, std::map<std::string, Enum>& table, Parse parse,
                        const std::string& source, MappingLoad& log) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    std::string line(content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    if (first) line = text::strip_bom(std::move(line));
    auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    auto fields = text::split_record(line, delim);
    if (!fields || fields->size() < 2) {
      throw Error(ErrorCode::MalformedRow,
                  source + ":" + std::to_string(line_no) + ": expected raw_label<TAB>consolidated_name");
    }
    auto raw = std::string(text::trim((*fields)[0]));
    auto name = std::string(text::trim((*fields)[1]));
    if (first && raw == "raw_label") {
      first = false;
      continue;
    }
    first = false;
    auto value = parse(name);
    if (!value) {
      throw Error(ErrorCode::MalformedRow,
                  source + ":" + std::to_string(line_no) + ": unknown category '" + name + "'");
    }
    auto [it, inserted] = table.insert_or_assign(raw, *value);
    if (!inserted) {
      log.warnings.push_back(source + ":" + std::to_string(line_no) + ": duplicate label '" + raw +
                             "', last one wins");
    }
  }
}

}  // namespace detail

/// Two-column delimited text (raw_label, consolidated_name), tab or comma separated.
/// Consolidated names are enum identifiers or display names. Duplicate raw labels:
/// the last entry wins and a warning is recorded.
inline MappingLoad load_knowledge_mapping(std::string_view content, CategoryMapping& mapping,
                                          const std::string& source = "knowledge mapping") {
  MappingLoad log;
  detail::load_mapping_table(content, mapping.knowledge, parse_knowledge_area, source, log);
  return log;
}

inline MappingLoad load_ability_mapping(std::string_view content, CategoryMapping& mapping,
                                        const std::string& source = "ability mapping") {
  MappingLoad log;
  detail::load_mapping_table(content, mapping.ability, parse_ability_domain, source, log);
  return log;
}

inline MappingLoad load_mapping_files(const std::string& knowledge_path, const std::string& ability_path,
                                      CategoryMapping& mapping) {
  auto log = load_knowledge_mapping(text::read_file(knowledge_path), mapping, knowledge_path);
  auto more = load_ability_mapping(text::read_file(ability_path), mapping, ability_path);
  log.warnings.insert(log.warnings.end(), more.warnings.begin(), more.warnings.end());
  return log;
}

/// Maps every consolidated identifier to itself.
inline CategoryMapping identity_mapping() {
  CategoryMapping m;
  for (auto a : kAllKnowledgeAreas) m.knowledge.emplace(std::string(to_string(a)), a);
  for (auto d : kAllAbilityDomains) m.ability.emplace(std::string(to_string(d)), d);
  return m;
}

/// Small illustrative mapping used by tests and the synthetic generator. Real
/// deployments ship their own tables.
inline CategoryMapping default_mapping() {
  CategoryMapping m;
  m.knowledge = {
      {"行程问题", KnowledgeArea::SpeedAndTime},
      {"速度", KnowledgeArea::SpeedAndTime},
      {"时间计算", KnowledgeArea::SpeedAndTime},
      {"平面图形", KnowledgeArea::GeometricShapes},
      {"立体图形", KnowledgeArea::GeometricShapes},
      {"周长与面积", KnowledgeArea::GeometricShapes},
      {"统计图表", KnowledgeArea::DataStatisticsProbability},
      {"可能性", KnowledgeArea::DataStatisticsProbability},
      {"平均数", KnowledgeArea::DataStatisticsProbability},
      {"简易方程", KnowledgeArea::AlgebraFunctions},
      {"用字母表示数", KnowledgeArea::AlgebraFunctions},
      {"比和比例", KnowledgeArea::AlgebraFunctions},
      {"四则运算", KnowledgeArea::ArithmeticOperations},
      {"小数运算", KnowledgeArea::ArithmeticOperations},
      {"分数运算", KnowledgeArea::ArithmeticOperations},
      {"运算定律", KnowledgeArea::ArithmeticOperations},
  };
  m.ability = {
      {"解决实际问题", AbilityDomain::PracticalApplication},
      {"应用意识", AbilityDomain::PracticalApplication},
      {"数据分析", AbilityDomain::DataOrganizationStatistics},
      {"数据整理", AbilityDomain::DataOrganizationStatistics},
      {"计算", AbilityDomain::Computational},
      {"运算能力", AbilityDomain::Computational},
      {"空间观念", AbilityDomain::GeometricThinking},
      {"几何直观", AbilityDomain::GeometricThinking},
      {"推理能力", AbilityDomain::ReasoningLogical},
      {"逻辑思维", AbilityDomain::ReasoningLogical},
      {"创新意识", AbilityDomain::InnovativeAbstract},
      {"抽象能力", AbilityDomain::InnovativeAbstract},
  };
  return m;
}

inline std::string serialize_knowledge_mapping(const CategoryMapping& m) {
  std::ostringstream out;
  out << "raw_label\tconsolidated_name\n";
  for (const auto& [raw, area] : m.knowledge) out << raw << '\t' << to_string(area) << '\n';
  return out.str();
}

inline std::string serialize_ability_mapping(const CategoryMapping& m) {
  std::ostringstream out;
  out << "raw_label\tconsolidated_name\n";
  for (const auto& [raw, domain] : m.ability) out << raw << '\t' << to_string(domain) << '\n';
  return out.str();
}

/// Labels that had no mapping entry, with the number of records carrying each.
struct UnmappedReport {
  std::map<std::string, std::size_t> knowledge;
  std::map<std::string, std::size_t> ability;
  std::size_t excluded_records = 0;

  bool empty() const { return excluded_records == 0; }
};

struct MappedAttempts {
  std::vector<CleanAttempt> attempts;
  UnmappedReport unmapped;
};

/// Consolidates categories. Records with an unmapped knowledge or ability label are
/// excluded and counted. Throws Error(EmptyMapping) if either table is empty.
inline MappedAttempts apply_mapping(std::span<const AttemptRecord> records, const CategoryMapping& mapping) {
  if (mapping.knowledge.empty()) throw Error(ErrorCode::EmptyMapping, "knowledge mapping is empty");
  if (mapping.ability.empty()) throw Error(ErrorCode::EmptyMapping, "ability mapping is empty");
  MappedAttempts out;
  out.attempts.reserve(records.size());
  for (const auto& r : records) {
    auto k = mapping.knowledge.find(r.knowledge_raw);
    auto a = mapping.ability.find(r.ability_raw);
    bool k_ok = k != mapping.knowledge.end();
    bool a_ok = a != mapping.ability.end();
    if (!k_ok) ++out.unmapped.knowledge[r.knowledge_raw];
    if (!a_ok) ++out.unmapped.ability[r.ability_raw];
    if (!k_ok || !a_ok) {
      ++out.unmapped.excluded_records;
      continue;
    }
    out.attempts.push_back(
        {r.student_id, r.question_id, r.correct, r.difficulty, k->second, a->second, r.duration});
  }
  return out;
}

/// dedup then mapping.
inline MappedAttempts preprocess(std::span<const AttemptRecord> records, const CategoryMapping& mapping) {
  auto deduped = dedup_attempts(records);
  return apply_mapping(deduped, mapping);
}

}  // namespace tagfeed
