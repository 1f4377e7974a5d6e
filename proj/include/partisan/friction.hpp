#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "partisan/matrix.hpp"

namespace partisan {

enum class DisagreementCategory { kUnanimous = 0, kLow = 1, kMedium = 2, kHigh = 3 };

inline const char* category_name(DisagreementCategory c) {
  switch (c) {
    case DisagreementCategory::kUnanimous: return "unanimous";
    case DisagreementCategory::kLow: return "low";
    case DisagreementCategory::kMedium: return "medium";
    case DisagreementCategory::kHigh: return "high";
  }
  return "?";
}

/// Category cut points: low is (0, medium), medium is [medium, high),
/// high is [high, 0.5].
struct FrictionThresholds {
  double medium = 0.20;
  double high = 0.40;
};

inline DisagreementCategory categorize(double d, const FrictionThresholds& t = {}) {
  if (d <= 0.0) return DisagreementCategory::kUnanimous;
  if (d < t.medium) return DisagreementCategory::kLow;
  if (d < t.high) return DisagreementCategory::kMedium;
  return DisagreementCategory::kHigh;
}

struct DisagreementRecord {
  std::uint64_t proposal_id = 0;
  double disagreement = 0.0;
  DisagreementCategory category = DisagreementCategory::kUnanimous;
};

/// Share of yes/no voters on the losing side. Ties give 0.5.
inline DisagreementRecord static_disagreement(const VoterMatrix& m, std::uint64_t proposal_id,
                                              const FrictionThresholds& t = {}) {
  auto votes = column_votes(m, proposal_id);
  DisagreementRecord r;
  r.proposal_id = proposal_id;
  const auto total = votes.yes_count + votes.no_count;
  r.disagreement = total == 0 ? 0.0
                              : static_cast<double>(std::min(votes.yes_count, votes.no_count)) /
                                    static_cast<double>(total);
  r.category = categorize(r.disagreement, t);
  return r;
}

struct RollingPoint {
  std::uint64_t proposal_id = 0;
  double mean = 0.0;
};

/// Trailing mean over up to `window` records ending at each position.
inline std::vector<RollingPoint> rolling_disagreement(const std::vector<DisagreementRecord>& records,
                                                      std::size_t window = 10) {
  if (window == 0) throw PreconditionError("rolling window must be >= 1");
  std::vector<RollingPoint> out;
  out.reserve(records.size());
  for (std::size_t j = 0; j < records.size(); ++j) {
    std::size_t start = j + 1 >= window ? j + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t k = start; k <= j; ++k) sum += records[k].disagreement;
    out.push_back({records[j].proposal_id, sum / static_cast<double>(j - start + 1)});
  }
  return out;
}

enum class RollingTest { kMax, kMean };

struct FlagRule {
  double discord_share = 0.20;  // medium + high share must exceed this
  double rolling = 0.15;        // rolling statistic must exceed this
  RollingTest test = RollingTest::kMax;
};

struct FrictionReport {
  std::string dao_name;
  std::vector<DisagreementRecord> records;
  std::vector<RollingPoint> rolling;
  std::array<double, 4> category_shares{};  // indexed by DisagreementCategory
  bool flagged = false;

  double share(DisagreementCategory c) const { return category_shares[static_cast<int>(c)]; }
};

inline bool flag_dao(const FrictionReport& report, const FlagRule& rule = {}) {
  const double discord = report.share(DisagreementCategory::kMedium) + report.share(DisagreementCategory::kHigh);
  double stat = 0.0;
  if (!report.rolling.empty()) {
    if (rule.test == RollingTest::kMax) {
      for (const auto& p : report.rolling) stat = std::max(stat, p.mean);
    } else {
      for (const auto& p : report.rolling) stat += p.mean;
      stat /= static_cast<double>(report.rolling.size());
    }
  }
  return discord > rule.discord_share && stat > rule.rolling;
}

inline FrictionReport friction_report(const VoterMatrix& m, std::string dao_name, std::size_t window = 10,
                                      const FrictionThresholds& t = {}, const FlagRule& rule = {}) {
  FrictionReport rep;
  rep.dao_name = std::move(dao_name);
  for (auto p : m.proposal_ids()) rep.records.push_back(static_disagreement(m, p, t));
  rep.rolling = rolling_disagreement(rep.records, window);
  if (!rep.records.empty()) {
    for (const auto& r : rep.records) rep.category_shares[static_cast<int>(r.category)] += 1.0;
    for (auto& s : rep.category_shares) s /= static_cast<double>(rep.records.size());
  }
  rep.flagged = flag_dao(rep, rule);
  return rep;
}

}  // namespace partisan
