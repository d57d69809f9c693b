#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tagfeed {

/// Consolidated knowledge areas, in tag display order.
enum class KnowledgeArea : std::uint8_t {
  SpeedAndTime,
  GeometricShapes,
  DataStatisticsProbability,
  AlgebraFunctions,
  ArithmeticOperations,
};

/// Consolidated ability domains, in tag display order.
enum class AbilityDomain : std::uint8_t {
  PracticalApplication,
  DataOrganizationStatistics,
  Computational,
  GeometricThinking,
  ReasoningLogical,
  InnovativeAbstract,
};

inline constexpr std::size_t kKnowledgeAreaCount = 5;
inline constexpr std::size_t kAbilityDomainCount = 6;
inline constexpr std::size_t kDifficultyLevels = 3;

inline constexpr std::array<KnowledgeArea, kKnowledgeAreaCount> kAllKnowledgeAreas{
    KnowledgeArea::SpeedAndTime, KnowledgeArea::GeometricShapes,
    KnowledgeArea::DataStatisticsProbability, KnowledgeArea::AlgebraFunctions,
    KnowledgeArea::ArithmeticOperations};

inline constexpr std::array<AbilityDomain, kAbilityDomainCount> kAllAbilityDomains{
    AbilityDomain::PracticalApplication, AbilityDomain::DataOrganizationStatistics,
    AbilityDomain::Computational,        AbilityDomain::GeometricThinking,
    AbilityDomain::ReasoningLogical,     AbilityDomain::InnovativeAbstract};

inline constexpr std::string_view to_string(KnowledgeArea area) {
  constexpr std::array<std::string_view, kKnowledgeAreaCount> names{
      "SpeedAndTime", "GeometricShapes", "DataStatisticsProbability", "AlgebraFunctions",
      "ArithmeticOperations"};
  return names[static_cast<std::size_t>(area)];
}

inline constexpr std::string_view to_string(AbilityDomain domain) {
  constexpr std::array<std::string_view, kAbilityDomainCount> names{
      "PracticalApplication", "DataOrganizationStatistics", "Computational",
      "GeometricThinking",    "ReasoningLogical",           "InnovativeAbstract"};
  return names[static_cast<std::size_t>(domain)];
}

/// Human-readable group names, as used in reports.
inline constexpr std::string_view display_name(KnowledgeArea area) {
  constexpr std::array<std::string_view, kKnowledgeAreaCount> names{
      "Calculations of Speed and Time", "Geometric Shapes and Properties",
      "Data Statistics and Probability", "Algebra and Functions",
      "Arithmetic Operations and Properties"};
  return names[static_cast<std::size_t>(area)];
}

inline constexpr std::string_view display_name(AbilityDomain domain) {
  constexpr std::array<std::string_view, kAbilityDomainCount> names{
      "Practical Mathematical Application Skills", "Data Organization and Statistical Skills",
      "Computational Skills", "Geometric Thinking Skills", "Reasoning and Logical Thinking",
      "Innovative and Abstract Thinking"};
  return names[static_cast<std::size_t>(domain)];
}

// Accepts either the identifier or the display name.
inline std::optional<KnowledgeArea> parse_knowledge_area(std::string_view text) {
  for (auto area : kAllKnowledgeAreas) {
    if (text == to_string(area) || text == display_name(area)) return area;
  }
  return std::nullopt;
}

inline std::optional<AbilityDomain> parse_ability_domain(std::string_view text) {
  for (auto domain : kAllAbilityDomains) {
    if (text == to_string(domain) || text == display_name(domain)) return domain;
  }
  return std::nullopt;
}

enum class TagCategory : std::uint8_t { Performance, Knowledge, Ability };

enum class AccuracyBand : std::uint8_t { Adequate, Struggling };
enum class SpeedBand : std::uint8_t { Fast, Slow };

inline constexpr std::size_t kTagCount = 34;
inline constexpr std::size_t kPerformanceTagCount = 12;
inline constexpr std::size_t kKnowledgeTagCount = 10;
inline constexpr std::size_t kAbilityTagCount = 12;
static_assert(kPerformanceTagCount + kKnowledgeTagCount + kAbilityTagCount == kTagCount);

/// Position of a tag in the 34-flag vector. Serialized as "Tag_<category>_<n>".
class TagId {
 public:
  constexpr TagId() = default;

  static constexpr TagId from_index(std::size_t index) {
    if (index >= kTagCount) throw std::out_of_range("tag index out of range");
    return TagId(static_cast<std::uint8_t>(index));
  }

  /// level is 1..3 (easy, medium, difficult).
  static constexpr TagId performance(int level, AccuracyBand accuracy, SpeedBand speed) {
    if (level < 1 || level > 3) throw std::out_of_range("difficulty level out of range");
    int block = 0;
    if (accuracy == AccuracyBand::Adequate) {
      block = speed == SpeedBand::Fast ? 0 : 1;
    } else {
      block = speed == SpeedBand::Fast ? 2 : 3;
    }
    return TagId(static_cast<std::uint8_t>(block * 3 + (level - 1)));
  }

  static constexpr TagId knowledge(KnowledgeArea area, bool positive) {
    auto i = static_cast<std::size_t>(area);
    return TagId(static_cast<std::uint8_t>(kPerformanceTagCount + (positive ? i : i + 5)));
  }

  static constexpr TagId ability(AbilityDomain domain, bool positive) {
    auto i = static_cast<std::size_t>(domain);
    return TagId(static_cast<std::uint8_t>(kPerformanceTagCount + kKnowledgeTagCount +
                                           (positive ? i : i + 6)));
  }

  constexpr std::size_t index() const { return index_; }

  constexpr TagCategory category() const {
    if (index_ < kPerformanceTagCount) return TagCategory::Performance;
    if (index_ < kPerformanceTagCount + kKnowledgeTagCount) return TagCategory::Knowledge;
    return TagCategory::Ability;
  }

  /// 1-based position within the category.
  constexpr std::size_t ordinal() const {
    switch (category()) {
      case TagCategory::Performance: return index_ + 1;
      case TagCategory::Knowledge: return index_ - kPerformanceTagCount + 1;
      case TagCategory::Ability: return index_ - kPerformanceTagCount - kKnowledgeTagCount + 1;
    }
    return 0;
  }

  std::string name() const {
    return "Tag_" + std::to_string(static_cast<int>(category()) + 1) + "_" +
           std::to_string(ordinal());
  }

  static std::optional<TagId> parse(std::string_view text);

  friend constexpr bool operator==(TagId, TagId) = default;
  friend constexpr auto operator<=>(TagId, TagId) = default;

 private:
  constexpr explicit TagId(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = 0;
};

inline std::optional<TagId> TagId::parse(std::string_view text) {
  for (std::size_t i = 0; i < kTagCount; ++i) {
    auto id = from_index(i);
    if (id.name() == text) return id;
  }
  return std::nullopt;
}

inline std::array<TagId, kTagCount> all_tags() {
  std::array<TagId, kTagCount> ids{};
  for (std::size_t i = 0; i < kTagCount; ++i) ids[i] = TagId::from_index(i);
  return ids;
}

// English descriptions, indexed by tag position.
inline constexpr std::array<std::string_view, kTagCount> kTagDescriptions{
    "Correctly and quickly on easy questions.",
    "Correctly and quickly on medium difficulty questions.",
    "Correctly and quickly on difficult questions.",
    "Correctly but completed slowly on easy questions.",
    "Correctly but completed slowly on medium difficulty questions.",
    "Correctly but completed slowly on difficult questions.",
    "Incorrectly but completed quickly on easy questions.",
    "Answered incorrectly but quickly on medium difficulty questions.",
    "Incorrectly but completed quickly on difficult questions.",
    "Incorrectly but completed slowly on easy questions.",
    "Incorrectly but completed slowly on medium difficulty questions.",
    "Incorrectly but completed slowly on difficult questions.",
    "Outstanding performance in calculations speed and time.",
    "Outstanding in the identification and geometric shapes.",
    "Outstanding in data statistics and probability problems.",
    "Outstanding in algebraic equations and functions.",
    "Outstanding in arithmetic operations and properties.",
    "Struggling with calculations involving speed and time.",
    "Struggling to recognize and work with geometric shapes.",
    "Finding data statistics and probability problems challenging.",
    "Struggling with algebraic equations and functions.",
    "Struggling with arithmetic operations and properties.",
    "Strong capabilities in practical application of mathematics.",
    "Strong capabilities in statistical analysis.",
    "Strong computational skills.",
    "Strong geometric thinking skills.",
    "Strong logical reasoning skills.",
    "Strong innovative and abstract thinking skills.",
    "Challenged by the practical application of mathematics.",
    "Challenged by statistical analysis.",
    "Challenged by computational skills.",
    "Challenged by geometric thinking skills.",
    "Challenged by logical reasoning.",
    "Challenged by innovative and abstract thinking.",
};

inline constexpr std::string_view tag_description(TagId tag) {
  return kTagDescriptions[tag.index()];
}

/// The per-student 34-flag vector.
class TagSet {
 public:
  TagSet() = default;

  void set(TagId tag, bool value = true) { flags_[tag.index()] = value; }
  bool test(TagId tag) const { return flags_[tag.index()]; }

  std::size_t count() const {
    std::size_t n = 0;
    for (bool f : flags_) n += f ? 1 : 0;
    return n;
  }

  bool empty() const { return count() == 0; }

  const std::array<bool, kTagCount>& flags() const { return flags_; }

  std::vector<TagId> set_tags() const {
    std::vector<TagId> out;
    for (std::size_t i = 0; i < kTagCount; ++i) {
      if (flags_[i]) out.push_back(TagId::from_index(i));
    }
    return out;
  }

  TagSet& operator|=(const TagSet& other) {
    for (std::size_t i = 0; i < kTagCount; ++i) flags_[i] = flags_[i] || other.flags_[i];
    return *this;
  }

  /// "0,1,0,..." in tag order.
  std::string to_csv() const {
    std::string out;
    out.reserve(kTagCount * 2);
    for (std::size_t i = 0; i < kTagCount; ++i) {
      if (i) out.push_back(',');
      out.push_back(flags_[i] ? '1' : '0');
    }
    return out;
  }

  /// Human-readable descriptions of every violated mutual exclusion; empty when valid.
  std::vector<std::string> violations() const;

  bool valid() const { return violations().empty(); }

  friend bool operator==(const TagSet&, const TagSet&) = default;

 private:
  std::array<bool, kTagCount> flags_{};
};

inline std::vector<std::string> TagSet::violations() const {
  std::vector<std::string> out;
  for (int level = 1; level <= 3; ++level) {
    std::vector<std::string> set;
    for (auto acc : {AccuracyBand::Adequate, AccuracyBand::Struggling}) {
      for (auto speed : {SpeedBand::Fast, SpeedBand::Slow}) {
        auto id = TagId::performance(level, acc, speed);
        if (test(id)) set.push_back(id.name());
      }
    }
    if (set.size() > 1) {
      std::string msg = "more than one performance tag at difficulty " + std::to_string(level) + ":";
      for (const auto& n : set) msg += " " + n;
      out.push_back(std::move(msg));
    }
  }
  for (auto area : kAllKnowledgeAreas) {
    auto pos = TagId::knowledge(area, true);
    auto neg = TagId::knowledge(area, false);
    if (test(pos) && test(neg)) out.push_back(pos.name() + " and " + neg.name() + " both set");
  }
  for (auto domain : kAllAbilityDomains) {
    auto pos = TagId::ability(domain, true);
    auto neg = TagId::ability(domain, false);
    if (test(pos) && test(neg)) out.push_back(pos.name() + " and " + neg.name() + " both set");
  }
  return out;
}

}  // namespace tagfeed
