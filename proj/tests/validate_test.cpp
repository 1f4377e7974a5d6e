#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "partisan/friction.hpp"
#include "partisan/synth.hpp"
#include "partisan/validate.hpp"
#include "test_util.hpp"

using namespace partisan;
using testutil::addr;

namespace {

ClusteringResult clustering(const std::vector<int>& labels, std::uint64_t proposal = 1, int k = 2) {
  ClusteringResult r;
  r.proposal_id = proposal;
  r.k_star = k;
  for (std::size_t i = 0; i < labels.size(); ++i) r.addresses.push_back(addr(static_cast<int>(i)));
  r.assignments = labels;
  return r;
}

ForkGroundTruth fork_of(std::initializer_list<int> ids) {
  ForkGroundTruth f;
  for (int i : ids) f.addresses.insert(addr(i));
  return f;
}

PlantedDao small_planted() { return generate_planted_dao({.majority_size = 12, .minority_size = 6, .proposals = 30}); }

}  // namespace

TEST(ShuffleVotes, UnanimousColumnUnchanged) {
  auto m = testutil::matrix_of({{1, 0}, {1, 1}, {1, -1}, {1, 0}});
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto sh = shuffle_votes(m, s);
    for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(sh.at(r, 0), 1);
    EXPECT_EQ(sh.at(2, 1), -1);
  }
}

TEST(ShuffleVotes, MovesVotesBetweenVoters) {
  auto m = testutil::matrix_of({{1}, {0}, {-1}});
  std::set<int> first_values;
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto sh = shuffle_votes(m, s);
    EXPECT_EQ(sh.at(2, 0), -1);
    first_values.insert(sh.at(0, 0));
  }
  EXPECT_EQ(first_values, (std::set<int>{0, 1}));
}

TEST(ShuffleVotes, PreservesCountsVotersAndDisagreement) {
  auto dao = small_planted();
  auto m = build_voter_matrix(dao.events);
  for (std::uint64_t s = 0; s < 25; ++s) {
    auto sh = shuffle_votes(m, s);
    EXPECT_EQ(shuffle_votes(m, s), sh);
    for (auto p : m.proposal_ids()) {
      auto a = column_votes(m, p), b = column_votes(sh, p);
      EXPECT_EQ(a.yes_count, b.yes_count);
      EXPECT_EQ(a.no_count, b.no_count);
      EXPECT_EQ(a.voters, b.voters);
      EXPECT_EQ(static_disagreement(m, p).disagreement, static_disagreement(sh, p).disagreement);
    }
  }
}

TEST(ForkClusterShare, Values) {
  EXPECT_EQ(*fork_cluster_share(clustering({0, 0, 0, 1}), fork_of({0, 1, 2})), 1.0);
  std::vector<int> labels(15, 0);
  labels[14] = 1;
  labels.push_back(1);
  ForkGroundTruth f;
  for (int i = 0; i < 15; ++i) f.addresses.insert(addr(i));
  EXPECT_DOUBLE_EQ(*fork_cluster_share(clustering(labels), f), 14.0 / 15.0);
  EXPECT_EQ(*fork_cluster_share(clustering({0, 1, 0, 1}), fork_of({0, 1})), 0.5);
  EXPECT_FALSE(fork_cluster_share(clustering({0, 1}), fork_of({5})));
  EXPECT_FALSE(fork_cluster_share(clustering({0, 1, 1}), fork_of({0, 1}), 3));
  EXPECT_TRUE(fork_cluster_share(clustering({0, 1, 1}), fork_of({0, 1}), 2));
}

TEST(SummarizeRange, SingletonAndEmpty) {
  auto r = clustering({0, 0, 1}, 7, 3);
  auto s = summarize_range({r}, fork_of({0, 1}), {7, 7});
  EXPECT_EQ(*s.avg_clusters, 3.0);
  EXPECT_EQ(*s.fork_share, 1.0);
  EXPECT_EQ(s.proposals_counted, 1u);
  EXPECT_THROW(summarize_range({r}, fork_of({0}), {8, 9}), EmptyRange);

  auto none = summarize_range({r}, fork_of({50}), {1, 10});
  EXPECT_FALSE(none.fork_share);
  EXPECT_EQ(*none.avg_clusters, 3.0);
}

TEST(RunValidation, ZeroIterations) {
  auto dao = small_planted();
  auto rep = run_validation(dao.events, dao.minority_truth(), {}, {}, {{1, 30}}, 0, 0);
  EXPECT_TRUE(rep.seeds.empty());
  EXPECT_EQ(rep.randomized[0].avg_clusters.samples, 0u);
  EXPECT_TRUE(rep.genuine[0].avg_clusters);
  auto j = validation_report_to_json(rep);
  EXPECT_TRUE(j["ranges"][0]["avg_clusters"]["rand_avg"].is_null());
}

TEST(RunValidation, PlantedBlocBeatsShuffle) {
  auto dao = generate_planted_dao({});
  auto rep = run_validation(dao.events, dao.minority_truth(), {}, {}, {{1, 60}}, 8, 0);
  ASSERT_TRUE(rep.genuine[0].fork_share);
  const auto& rnd = rep.randomized[0].fork_share;
  EXPECT_GE(*rep.genuine[0].fork_share - rnd.mean, 0.2);
  EXPECT_LE(rnd.min, rnd.mean);
  EXPECT_LE(rnd.mean, rnd.max);
  EXPECT_EQ(rep.seeds.size() + rep.failed.size(), 8u);
}

TEST(RunValidation, IndependentOfWorkerCount) {
  auto dao = small_planted();
  auto run = [&](unsigned workers) {
    ValidationOptions opt;
    opt.workers = workers;
    return validation_report_to_json(
        run_validation(dao.events, dao.minority_truth(), {}, {}, {{1, 30}, {11, 30}}, 5, 3, opt));
  };
  auto one = run(1);
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(8));
}

TEST(ParticipationStats, Counts) {
  // addr(0), addr(1) fork; proposals 1, 2 early; 3 late.
  auto m = testutil::matrix_of({{1, 0, -1}, {1, -1, -1}, {0, 1, 1}, {1, 1, 0}});
  auto s = participation_stats(m, fork_of({0, 1}), 3);
  EXPECT_DOUBLE_EQ(s.early_fork, 1.5);
  EXPECT_DOUBLE_EQ(s.early_nonfork, 2.0);
  EXPECT_DOUBLE_EQ(s.late_fork, 0.0);
  EXPECT_DOUBLE_EQ(s.late_nonfork, 2.0);
  EXPECT_EQ(s.early_proposals, 2u);
  EXPECT_THROW(participation_stats(m, fork_of({0}), 9), UnknownProposal);
}
