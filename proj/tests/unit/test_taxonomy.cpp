#include <fstream>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "tagfeed/taxonomy.hpp"

using namespace tagfeed;

TEST(Taxonomy, DescriptionsMatchGoldenTable) {
  std::ifstream in(TAGFEED_TEST_DATA "/tag_table.tsv");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    auto id = TagId::parse(line.substr(0, tab));
    ASSERT_TRUE(id) << line;
    EXPECT_EQ(tag_description(*id), line.substr(tab + 1));
    ++rows;
  }
  EXPECT_EQ(rows, kTagCount);
}

TEST(Taxonomy, SpotDescriptions) {
  EXPECT_EQ(tag_description(*TagId::parse("Tag_1_1")), "Correctly and quickly on easy questions.");
  EXPECT_EQ(tag_description(*TagId::parse("Tag_2_8")), "Finding data statistics and probability problems challenging.");
  EXPECT_EQ(tag_description(*TagId::parse("Tag_3_12")), "Challenged by innovative and abstract thinking.");
}

TEST(Taxonomy, PartitionSizes) {
  int perf = 0, know = 0, abil = 0;
  for (auto id : all_tags()) {
    switch (id.category()) {
      case TagCategory::Performance: ++perf; break;
      case TagCategory::Knowledge: ++know; break;
      case TagCategory::Ability: ++abil; break;
    }
  }
  EXPECT_EQ(perf, 12);
  EXPECT_EQ(know, 10);
  EXPECT_EQ(abil, 12);
}

TEST(Taxonomy, NamesRoundTrip) {
  std::set<std::string> names;
  for (auto id : all_tags()) {
    auto parsed = TagId::parse(id.name());
    ASSERT_TRUE(parsed);
    EXPECT_EQ(parsed->index(), id.index());
    names.insert(id.name());
  }
  EXPECT_EQ(names.size(), kTagCount);
  EXPECT_FALSE(TagId::parse("Tag_1_13"));
  EXPECT_FALSE(TagId::parse("Tag_2_0"));
  EXPECT_FALSE(TagId::parse("tag_1_1"));
  EXPECT_FALSE(TagId::parse("Tag_4_1"));
}

TEST(Taxonomy, DescriptionsDistinct) {
  std::set<std::string_view> seen(kTagDescriptions.begin(), kTagDescriptions.end());
  EXPECT_EQ(seen.size(), kTagCount);
}

TEST(Taxonomy, ConstructorsFollowTableLayout) {
  EXPECT_EQ(TagId::performance(2, AccuracyBand::Struggling, SpeedBand::Slow).name(), "Tag_1_11");
  EXPECT_EQ(TagId::performance(3, AccuracyBand::Adequate, SpeedBand::Slow).name(), "Tag_1_6");
  EXPECT_EQ(TagId::knowledge(KnowledgeArea::DataStatisticsProbability, false).name(), "Tag_2_8");
  EXPECT_EQ(TagId::knowledge(KnowledgeArea::AlgebraFunctions, true).name(), "Tag_2_4");
  EXPECT_EQ(TagId::ability(AbilityDomain::Computational, true).name(), "Tag_3_3");
  EXPECT_EQ(TagId::ability(AbilityDomain::ReasoningLogical, false).name(), "Tag_3_11");
}

TEST(TagSet, MutualExclusions) {
  TagSet ok;
  ok.set(*TagId::parse("Tag_1_1"));
  ok.set(*TagId::parse("Tag_1_5"));
  ok.set(*TagId::parse("Tag_2_3"));
  ok.set(*TagId::parse("Tag_2_6"));
  EXPECT_TRUE(ok.valid());

  TagSet two_perf;
  two_perf.set(*TagId::parse("Tag_1_1"));
  two_perf.set(*TagId::parse("Tag_1_4"));
  EXPECT_FALSE(two_perf.valid());

  TagSet both_sides;
  both_sides.set(*TagId::parse("Tag_2_3"));
  both_sides.set(*TagId::parse("Tag_2_8"));
  EXPECT_FALSE(both_sides.valid());

  TagSet ability_clash;
  ability_clash.set(*TagId::parse("Tag_3_1"));
  ability_clash.set(*TagId::parse("Tag_3_7"));
  EXPECT_EQ(ability_clash.violations().size(), 1u);
}

TEST(TagSet, CsvIsThirtyFourFlags) {
  TagSet t;
  t.set(*TagId::parse("Tag_3_12"));
  auto csv = t.to_csv();
  EXPECT_EQ(csv.size(), 2 * kTagCount - 1);
  EXPECT_EQ(csv.back(), '1');
  EXPECT_EQ(t.count(), 1u);
}
