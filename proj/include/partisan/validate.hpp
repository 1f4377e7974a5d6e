#pragma once

// Fork-alignment statistics and the vote-shuffle baseline.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "partisan/ingest.hpp"
#include "partisan/pipeline.hpp"
#include "partisan/rng.hpp"

namespace partisan {

/// Permutes the yes/no votes of each column among that column's voters,
/// column by column in order, with a single stream `Rng(seed)` and an
/// ascending Fisher-Yates pass. Non-votes are untouched.
inline VoterMatrix shuffle_votes(const VoterMatrix& m, std::uint64_t seed) {
  VoterMatrix out = m;
  Rng rng(seed);
  std::vector<std::size_t> rows;
  std::vector<std::int8_t> values;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    rows.clear();
    values.clear();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (VoterMatrix::valid(m.at(r, c))) {
        rows.push_back(r);
        values.push_back(m.at(r, c));
      }
    }
    for (std::size_t i = values.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(rng.below(i));
      std::swap(values[i - 1], values[j]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) out.at(rows[i], c) = values[i];
  }
  return out;
}

/// Largest fraction of the active fork addresses that share one cluster,
/// or nothing when fewer than `min_fork_present` fork addresses are active.
inline std::optional<double> fork_cluster_share(const ClusteringResult& result, const ForkGroundTruth& fork,
                                                std::size_t min_fork_present = 1) {
  std::map<int, std::size_t> per_cluster;
  std::size_t present = 0;
  for (std::size_t i = 0; i < result.addresses.size(); ++i) {
    if (!fork.contains(result.addresses[i])) continue;
    ++present;
    ++per_cluster[result.assignments[i]];
  }
  if (present == 0 || present < min_fork_present) return std::nullopt;
  std::size_t largest = 0;
  for (const auto& [label, count] : per_cluster) largest = std::max(largest, count);
  return static_cast<double>(largest) / static_cast<double>(present);
}

struct ProposalRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  bool contains(std::uint64_t p) const { return p >= first && p <= last; }
  bool operator==(const ProposalRange&) const = default;
};

struct RangeSummary {
  ProposalRange range;
  std::optional<double> avg_clusters;
  std::optional<double> fork_share;
  std::size_t proposals_counted = 0;
  std::size_t fork_proposals_counted = 0;
};

inline RangeSummary summarize_range(const std::vector<ClusteringResult>& results, const ForkGroundTruth& fork,
                                    ProposalRange range, std::size_t min_fork_present = 1) {
  RangeSummary s;
  s.range = range;
  double k_sum = 0.0, share_sum = 0.0;
  for (const auto& r : results) {
    if (!range.contains(r.proposal_id)) continue;
    ++s.proposals_counted;
    k_sum += r.k_star;
    if (auto share = fork_cluster_share(r, fork, min_fork_present)) {
      ++s.fork_proposals_counted;
      share_sum += *share;
    }
  }
  if (s.proposals_counted == 0)
    throw EmptyRange("no analysed proposals in " + std::to_string(range.first) + "-" + std::to_string(range.last));
  s.avg_clusters = k_sum / static_cast<double>(s.proposals_counted);
  if (s.fork_proposals_counted) s.fork_share = share_sum / static_cast<double>(s.fork_proposals_counted);
  return s;
}

struct RandomizedStat {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double mean = 0.0;
  std::size_t samples = 0;

  void add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    mean += (v - mean) / static_cast<double>(++samples);
  }
};

struct RandomizedRange {
  RandomizedStat avg_clusters;
  RandomizedStat fork_share;
};

struct FailedIteration {
  std::uint64_t seed = 0;
  std::string error;
};

struct ValidationOptions {
  int k_min = 2;
  int k_max = 5;
  KmeansOptions kmeans;
  std::size_t min_fork_present = 1;
  unsigned workers = 1;
};

struct ValidationReport {
  std::vector<ProposalRange> ranges;
  std::vector<RangeSummary> genuine;
  std::vector<RandomizedRange> randomized;  // parallel to ranges
  std::size_t iterations = 0;
  std::vector<std::uint64_t> seeds;  // seeds that completed
  std::vector<FailedIteration> failed;
  std::size_t min_fork_present = 1;
  AnalysisRun genuine_run;
};

namespace detail {

inline RangeSummary summarize_or_empty(const std::vector<ClusteringResult>& results, const ForkGroundTruth& fork,
                                       ProposalRange range, std::size_t min_fork_present) {
  try {
    return summarize_range(results, fork, range, min_fork_present);
  } catch (const EmptyRange&) {
    RangeSummary s;
    s.range = range;
    return s;
  }
}

}  // namespace detail

/// Runs the pipeline on the genuine matrix and on `iterations` shuffled
/// copies (shuffle seeds 0..iterations-1; pipeline seeds from `root_seed`),
/// then aggregates per-range statistics. Iterations that fail are recorded
/// and excluded. Output does not depend on `workers`.
inline ValidationReport run_validation(const VoterMatrix& matrix, const ForkGroundTruth& fork, const WindowSpec& window,
                                       const MdsConfig& mds, const std::vector<ProposalRange>& ranges,
                                       std::size_t iterations, std::uint64_t root_seed,
                                       const ValidationOptions& opt = {}) {
  PipelineConfig cfg;
  cfg.window = window;
  cfg.mds = mds;
  cfg.k_min = opt.k_min;
  cfg.k_max = opt.k_max;
  cfg.kmeans = opt.kmeans;
  cfg.root_seed = root_seed;

  ValidationReport rep;
  rep.ranges = ranges;
  rep.iterations = iterations;
  rep.min_fork_present = opt.min_fork_present;
  rep.genuine_run = run_analysis(matrix, cfg);
  const auto genuine_results = rep.genuine_run.clusterings();
  for (const auto& r : ranges)
    rep.genuine.push_back(detail::summarize_or_empty(genuine_results, fork, r, opt.min_fork_present));

  struct Outcome {
    std::vector<RangeSummary> summaries;
    std::string error;
  };
  std::vector<Outcome> outcomes(iterations);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < iterations; i = next++) {
      try {
        auto shuffled = shuffle_votes(matrix, i);
        auto run = run_analysis(shuffled, cfg);
        for (std::size_t p = 0; p < run.proposals.size(); ++p) {
          const auto& a = run.proposals[p].active;
          const auto& g = rep.genuine_run.proposals[p].active;
          if (a.has_value() != g.has_value() || (a && (a->addresses != g->addresses || a->window != g->window)))
            throw std::logic_error("active set differs from genuine run at proposal " +
                                   std::to_string(run.proposals[p].proposal_id));
        }
        const auto results = run.clusterings();
        for (const auto& r : ranges)
          outcomes[i].summaries.push_back(detail::summarize_or_empty(results, fork, r, opt.min_fork_present));
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  unsigned n_workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(std::max<std::size_t>(1, iterations))));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  rep.randomized.resize(ranges.size());
  for (std::size_t i = 0; i < iterations; ++i) {
    if (!outcomes[i].error.empty()) {
      rep.failed.push_back({i, outcomes[i].error});
      continue;
    }
    rep.seeds.push_back(i);
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      const auto& s = outcomes[i].summaries[r];
      if (s.avg_clusters) rep.randomized[r].avg_clusters.add(*s.avg_clusters);
      if (s.fork_share) rep.randomized[r].fork_share.add(*s.fork_share);
    }
  }
  return rep;
}

inline ValidationReport run_validation(const std::vector<VoteEvent>& events, const ForkGroundTruth& fork,
                                       const WindowSpec& window, const MdsConfig& mds,
                                       const std::vector<ProposalRange>& ranges, std::size_t iterations,
                                       std::uint64_t root_seed, const ValidationOptions& opt = {}) {
  return run_validation(build_voter_matrix(events), fork, window, mds, ranges, iterations, root_seed, opt);
}

inline nlohmann::json validation_report_to_json(const ValidationReport& rep) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  auto stat = [](const RandomizedStat& s) {
    if (s.samples == 0) return json{{"rand_min", nullptr}, {"rand_max", nullptr}, {"rand_avg", nullptr}};
    return json{{"rand_min", s.min}, {"rand_max", s.max}, {"rand_avg", s.mean}};
  };
  json ranges = json::array();
  for (std::size_t r = 0; r < rep.ranges.size(); ++r) {
    json ac = stat(rep.randomized[r].avg_clusters);
    ac["value"] = opt(rep.genuine[r].avg_clusters);
    json fs = stat(rep.randomized[r].fork_share);
    fs["value"] = opt(rep.genuine[r].fork_share);
    ranges.push_back(json{{"range", {rep.ranges[r].first, rep.ranges[r].last}},
                          {"proposals_counted", rep.genuine[r].proposals_counted},
                          {"fork_proposals_counted", rep.genuine[r].fork_proposals_counted},
                          {"avg_clusters", ac},
                          {"fork_share", fs}});
  }
  json failed = json::array();
  for (const auto& f : rep.failed) failed.push_back(json{{"seed", f.seed}, {"error", f.error}});
  return json{{"iterations", rep.iterations},
              {"seeds", rep.seeds},
              {"failed", failed},
              {"min_fork_present", rep.min_fork_present},
              {"ranges", ranges}};
}

struct ParticipationStats {
  double early_fork = 0.0;     // mean fork voters per proposal before split
  double late_fork = 0.0;      // from split onward
  double early_nonfork = 0.0;
  double late_nonfork = 0.0;
  std::size_t early_proposals = 0;
  std::size_t late_proposals = 0;
};

/// Mean per-proposal counts of voting fork and non-fork addresses before
/// `split_at` and from it onward, over surviving columns.
inline ParticipationStats participation_stats(const VoterMatrix& m, const ForkGroundTruth& fork,
                                              std::uint64_t split_at) {
  if (m.cols() == 0 || split_at < m.proposal_ids().front() || split_at > m.proposal_ids().back())
    throw UnknownProposal("split proposal " + std::to_string(split_at) + " outside matrix range");
  std::vector<bool> is_fork(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) is_fork[r] = fork.contains(m.addresses()[r]);
  ParticipationStats s;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::size_t f = 0, o = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (!VoterMatrix::valid(m.at(r, c))) continue;
      (is_fork[r] ? f : o)++;
    }
    if (m.proposal_ids()[c] < split_at) {
      s.early_fork += static_cast<double>(f);
      s.early_nonfork += static_cast<double>(o);
      ++s.early_proposals;
    } else {
      s.late_fork += static_cast<double>(f);
      s.late_nonfork += static_cast<double>(o);
      ++s.late_proposals;
    }
  }
  if (s.early_proposals) {
    s.early_fork /= static_cast<double>(s.early_proposals);
    s.early_nonfork /= static_cast<double>(s.early_proposals);
  }
  if (s.late_proposals) {
    s.late_fork /= static_cast<double>(s.late_proposals);
    s.late_nonfork /= static_cast<double>(s.late_proposals);
  }
  return s;
}

}  // namespace partisan
