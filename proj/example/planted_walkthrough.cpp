// Generates a two-bloc synthetic DAO, runs the per-proposal analysis and a
// small shuffle baseline, and prints what the detector sees.
//
//   planted_walkthrough [iterations]

#include <cstdio>
#include <cstdlib>

#include "partisan/friction.hpp"
#include "partisan/synth.hpp"
#include "partisan/validate.hpp"

int main(int argc, char** argv) {
  using namespace partisan;
  const std::size_t iterations = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 10;

  auto dao = generate_planted_dao({});
  auto matrix = build_voter_matrix(dao.events);
  std::printf("%zu voters x %zu proposals, minority bloc of %zu\n", matrix.rows(), matrix.cols(), dao.minority.size());

  auto friction = friction_report(matrix, "planted");
  std::printf("medium+high share %.3f, flagged: %s\n",
              friction.share(DisagreementCategory::kMedium) + friction.share(DisagreementCategory::kHigh),
              flag_dao(friction) ? "yes" : "no");

  auto truth = dao.minority_truth();
  auto rep = run_validation(matrix, truth, {}, {}, {{1, 60}, {41, 60}}, iterations, 0);
  for (const auto& p : rep.genuine_run.proposals) {
    if (!p.clustering) {
      std::printf("proposal %3llu  skipped (%s)\n", static_cast<unsigned long long>(p.proposal_id), p.skipped.c_str());
      continue;
    }
    auto share = fork_cluster_share(*p.clustering, truth);
    std::printf("proposal %3llu  active %2zu  stress %.3f  k* %d  bloc share %.2f\n",
                static_cast<unsigned long long>(p.proposal_id), p.clustering->addresses.size(), p.embedding->stress,
                p.clustering->k_star, share.value_or(0.0));
  }
  for (std::size_t r = 0; r < rep.ranges.size(); ++r) {
    const auto& g = rep.genuine[r];
    const auto& s = rep.randomized[r];
    std::printf("range %llu-%llu  clusters %.2f (shuffled %.2f)  bloc share %.3f (shuffled %.3f)\n",
                static_cast<unsigned long long>(rep.ranges[r].first),
                static_cast<unsigned long long>(rep.ranges[r].last), g.avg_clusters.value_or(0.0),
                s.avg_clusters.mean, g.fork_share.value_or(0.0), s.fork_share.mean);
  }
}
