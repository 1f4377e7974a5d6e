#include <gtest/gtest.h>

#include <algorithm>

#include "partisan/friction.hpp"
#include "partisan/rng.hpp"
#include "test_util.hpp"

using namespace partisan;

namespace {

VoterMatrix column(int yes, int no) {
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < yes; ++i) rows.push_back({1});
  for (int i = 0; i < no; ++i) rows.push_back({0});
  return testutil::matrix_of(rows);
}

std::vector<DisagreementRecord> series(const std::vector<double>& d) {
  std::vector<DisagreementRecord> out;
  for (std::size_t i = 0; i < d.size(); ++i) out.push_back({i + 1, d[i], categorize(d[i])});
  return out;
}

FrictionReport report_from(const std::vector<double>& d, std::size_t window = 10) {
  FrictionReport rep;
  rep.records = series(d);
  rep.rolling = rolling_disagreement(rep.records, window);
  for (const auto& r : rep.records) rep.category_shares[static_cast<int>(r.category)] += 1.0 / d.size();
  return rep;
}

}  // namespace

TEST(StaticDisagreement, Unanimous) {
  auto r = static_disagreement(column(10, 0), 1);
  EXPECT_EQ(r.disagreement, 0.0);
  EXPECT_EQ(r.category, DisagreementCategory::kUnanimous);
}

TEST(StaticDisagreement, BoundaryIsHigh) {
  auto r = static_disagreement(column(3, 2), 1);
  EXPECT_DOUBLE_EQ(r.disagreement, 0.4);
  EXPECT_EQ(r.category, DisagreementCategory::kHigh);
}

TEST(StaticDisagreement, TieIsHalf) {
  auto r = static_disagreement(column(4, 4), 1);
  EXPECT_EQ(r.disagreement, 0.5);
  EXPECT_EQ(r.category, DisagreementCategory::kHigh);
  EXPECT_THROW(static_disagreement(column(1, 1), 2), UnknownProposal);
}

TEST(StaticDisagreement, LabelSwapInvariance) {
  for (int yes = 0; yes <= 12; ++yes)
    for (int no = 0; no <= 12; ++no) {
      if (yes + no == 0) continue;
      auto a = static_disagreement(column(yes, no), 1), b = static_disagreement(column(no, yes), 1);
      EXPECT_EQ(a.disagreement, b.disagreement);
      EXPECT_GE(a.disagreement, 0.0);
      EXPECT_LE(a.disagreement, 0.5);
    }
}

TEST(Categorize, IntervalsAreExhaustive) {
  EXPECT_EQ(categorize(0.0), DisagreementCategory::kUnanimous);
  EXPECT_EQ(categorize(1e-9), DisagreementCategory::kLow);
  EXPECT_EQ(categorize(0.1999999), DisagreementCategory::kLow);
  EXPECT_EQ(categorize(0.2), DisagreementCategory::kMedium);
  EXPECT_EQ(categorize(0.3999999), DisagreementCategory::kMedium);
  EXPECT_EQ(categorize(0.4), DisagreementCategory::kHigh);
  EXPECT_EQ(categorize(0.5), DisagreementCategory::kHigh);
}

TEST(Rolling, ConstantSeries) {
  for (const auto& p : rolling_disagreement(series(std::vector<double>(25, 0.3)))) EXPECT_DOUBLE_EQ(p.mean, 0.3);
}

TEST(Rolling, ShortHistoryUsesAvailableRecords) {
  auto r = rolling_disagreement(series({0.0, 0.5}), 10);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].mean, 0.0);
  EXPECT_EQ(r[1].mean, 0.25);
  EXPECT_EQ(r[1].proposal_id, 2u);
}

TEST(Rolling, TrailingWindowAndBounds) {
  Rng rng(4);
  std::vector<double> d;
  for (int i = 0; i < 40; ++i) d.push_back(0.5 * rng.uniform());
  auto r = rolling_disagreement(series(d), 10);
  ASSERT_EQ(r.size(), d.size());
  double expect = 0;
  for (int i = 20; i < 30; ++i) expect += d[i];
  EXPECT_NEAR(r[29].mean, expect / 10, 1e-12);
  for (std::size_t j = 0; j < d.size(); ++j) {
    std::size_t s = j >= 9 ? j - 9 : 0;
    auto [lo, hi] = std::minmax_element(d.begin() + s, d.begin() + j + 1);
    EXPECT_GE(r[j].mean, *lo - 1e-15);
    EXPECT_LE(r[j].mean, *hi + 1e-15);
  }
  EXPECT_THROW(rolling_disagreement(series(d), 0), PreconditionError);
}

TEST(FlagDao, AllUnanimousIsNotFlagged) { EXPECT_FALSE(flag_dao(report_from(std::vector<double>(30, 0.0)))); }

TEST(FlagDao, BothConditionsRequired) {
  // 5 of 20 proposals at 0.2 (medium), spaced so no trailing window
  // averages above 0.10.
  std::vector<double> d(20, 0.0);
  for (int i : {3, 7, 11, 15, 19}) d[i] = 0.2;
  auto rep = report_from(d);
  double max_rolling = 0;
  for (const auto& p : rep.rolling) max_rolling = std::max(max_rolling, p.mean);
  ASSERT_DOUBLE_EQ(rep.share(DisagreementCategory::kMedium), 0.25);
  ASSERT_LE(max_rolling, 0.10);
  EXPECT_FALSE(flag_dao(rep));

  // Denser discord trips both conditions.
  std::vector<double> dense(20, 0.0);
  for (int i = 0; i < 20; i += 2) dense[i] = 0.45;
  EXPECT_TRUE(flag_dao(report_from(dense)));

  // High rolling but too little medium/high share.
  std::vector<double> sparse(20, 0.0);
  sparse[0] = 0.5;
  sparse[1] = 0.45;
  sparse[2] = 0.45;
  sparse[3] = 0.45;
  EXPECT_FALSE(flag_dao(report_from(sparse)));
}

TEST(FlagDao, MeanRollingVariant) {
  // Ten medium proposals, then calm: max rolling 0.2, mean rolling ~0.07.
  std::vector<double> d(40, 0.0);
  for (int i = 0; i < 10; ++i) d[i] = 0.2;
  auto rep = report_from(d);
  EXPECT_TRUE(flag_dao(rep, {.test = RollingTest::kMax}));
  EXPECT_FALSE(flag_dao(rep, {.test = RollingTest::kMean}));
}

TEST(FrictionReport, SharesSumToOne) {
  auto m = testutil::matrix_of({{1, 1, 0, 1}, {1, 0, 0, 1}, {1, 0, 1, 1}, {1, 1, 1, -1}, {1, 0, 1, 0}});
  auto rep = friction_report(m, "t");
  double sum = 0;
  for (double s : rep.category_shares) sum += s;
  EXPECT_DOUBLE_EQ(sum, 1.0);
  EXPECT_EQ(rep.records.size(), 4u);
  EXPECT_EQ(rep.records[1].disagreement, 0.4);  // 2 yes, 3 no
}
