#include <gtest/gtest.h>

#include "geezmt/dedup_split.hpp"
#include "geezmt/error.hpp"
#include "geezmt/stats.hpp"
#include "support.hpp"

namespace geezmt {
namespace {

TEST(StatsRow, EnGezBibleRowConsistent) {
  const StatsRow r{"en-gez", "bible", 11714, 6004, 4205, 1178, 621};
  EXPECT_EQ(r.split_sum(), 6004u);
  EXPECT_TRUE(r.consistent());
}

TEST(StatsRow, SumMismatchFails) {
  EXPECT_FALSE((StatsRow{"x-y", "d", 100, 90, 60, 20, 15}.consistent()));
}

TEST(StatsRow, AfterDedupAboveOriginalFails) {
  // Splits add up to the after-dedup column, but that column exceeds the
  // original count.
  const StatsRow r{"en-amh", "bible", 7573, 49317, 34522, 9863, 4932};
  EXPECT_EQ(r.split_sum(), r.after_dedup);
  EXPECT_FALSE(r.consistent());
}

TEST(StatsTable, EmptyIsHeaderOnly) {
  const StatsTable t = stats_report({});
  EXPECT_EQ(t.to_tsv(),
            "Direction\tDomain\tOriginal\tDuplicates removed\ttrain\ttest\tvalidation\tTotal\tConsistency\n");
  EXPECT_EQ(t.to_text().find('\n'), t.to_text().size() - 1);
}

TEST(StatsTable, TextLayoutGroupsDirections) {
  StatsTable t;
  t.add_row({"en-gez", "bible", 11714, 6004, 4205, 1178, 621});
  t.add_row({"en-gez", "tanzil", 1000, 900, 630, 180, 90});
  t.add_row({"en-amh", "bible", 7573, 49317, 34522, 9863, 4932});
  const auto lines = split_lines(t.to_text());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0].rfind("Direction", 0), 0u);
  EXPECT_EQ(lines[1].rfind("en-gez", 0), 0u);
  EXPECT_NE(lines[1].find("6904"), std::string::npos);  // direction total
  EXPECT_EQ(lines[2].rfind("      ", 0), 0u);           // direction blank on continuation
  EXPECT_NE(lines[2].find("tanzil"), std::string::npos);
  EXPECT_NE(lines[3].find("FAIL"), std::string::npos);
  EXPECT_NE(lines[1].find("OK"), std::string::npos);
  // Columns line up: every row has the consistency flag at the same offset.
  EXPECT_EQ(lines[1].find("OK"), lines[0].find("Consistency"));
  EXPECT_EQ(lines[3].find("FAIL"), lines[0].find("Consistency"));
}

TEST(StatsTable, TsvRoundTrip) {
  StatsTable t;
  t.add_row({"en-gez", "bible", 11714, 6004, 4205, 1178, 621});
  t.add_row({"en-tir", "tico", 332, 49111, 246, 10, 5});
  const auto back = StatsTable::from_tsv(t.to_tsv());
  ASSERT_EQ(back.rows().size(), 2u);
  EXPECT_EQ(back.to_tsv(), t.to_tsv());
  EXPECT_THROW(StatsTable::from_tsv("header\nbad\trow\n"), FormatError);
  EXPECT_THROW(StatsTable::from_tsv("header\na\tb\tc\td\te\tf\tg\n"), FormatError);
}

TEST(StatsReport, BundlesProduceConsistentRows) {
  const auto s = testing::make_synthetic_corpus(3, 3000, 0.05, 80);
  const std::vector<SplitBundle> bundles{split_stratified(s.corpus, SplitOptions{})};
  const auto t = stats_report(bundles);
  ASSERT_EQ(t.rows().size(), 3u);
  std::size_t original = 0;
  for (const auto& r : t.rows()) {
    EXPECT_TRUE(r.consistent()) << r.domain;
    original += r.original;
  }
  EXPECT_EQ(original, 3000u);
}

}  // namespace
}  // namespace geezmt
