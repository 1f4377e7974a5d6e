#pragma once

// Per-proposal analysis chain: active set -> dissimilarity -> MDS (warm
// started from the previous analysable proposal) -> k selection.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "partisan/cluster.hpp"
#include "partisan/dissim.hpp"
#include "partisan/embed.hpp"
#include "partisan/matrix.hpp"
#include "partisan/rng.hpp"

namespace partisan {

struct PipelineConfig {
  WindowSpec window;
  MdsConfig mds;  // seed is replaced by the per-proposal derived seed
  int k_min = 2;
  int k_max = 5;
  KmeansOptions kmeans;
  std::uint64_t root_seed = 0;
  bool keep_dissimilarity = false;
};

struct ProposalAnalysis {
  std::uint64_t proposal_id = 0;
  std::optional<ActiveSet> active;
  std::optional<DissimilarityMatrix> dissimilarity;
  std::optional<Embedding> embedding;
  std::optional<ClusteringResult> clustering;
  /// Error kind when the proposal could not be analysed.
  std::string skipped;

  bool analysed() const { return clustering.has_value(); }
};

struct AnalysisRun {
  std::vector<ProposalAnalysis> proposals;  // one per column except the first

  std::vector<ClusteringResult> clusterings() const {
    std::vector<ClusteringResult> out;
    for (const auto& p : proposals)
      if (p.clustering) out.push_back(*p.clustering);
    return out;
  }
};

inline std::uint64_t embed_seed(std::uint64_t root, std::uint64_t proposal_id) {
  return derive_seed(root, SeedStage::kEmbedInit, {proposal_id});
}

inline std::uint64_t cluster_seed(std::uint64_t root, std::uint64_t proposal_id) {
  return derive_seed(root, SeedStage::kKmeans, {proposal_id});
}

inline AnalysisRun run_analysis(const VoterMatrix& m, const PipelineConfig& cfg) {
  AnalysisRun run;
  std::optional<Embedding> previous;
  for (std::size_t j = 2; j <= m.cols(); ++j) {
    ProposalAnalysis pa;
    pa.proposal_id = m.proposal_ids()[j - 1];
    try {
      pa.active = active_set(m, j, cfg.window);
      auto d = dissimilarity_matrix(m, *pa.active);
      MdsConfig mds = cfg.mds;
      mds.seed = embed_seed(cfg.root_seed, pa.proposal_id);
      auto init = warm_start(previous, d.addresses(), mds.seed);
      pa.embedding = mds_embed(d, init, mds);
      previous = pa.embedding;
      auto cr = select_k(pa.embedding->coords, cfg.k_min, cfg.k_max, cluster_seed(cfg.root_seed, pa.proposal_id),
                         cfg.kmeans);
      cr.proposal_id = pa.proposal_id;
      cr.addresses = d.addresses();
      pa.clustering = std::move(cr);
      if (cfg.keep_dissimilarity) pa.dissimilarity = std::move(d);
    } catch (const EmptyActiveSet& e) {
      pa.skipped = e.kind();
    } catch (const AllZeroDissimilarity& e) {
      pa.skipped = e.kind();
    } catch (const TooFewPoints& e) {
      pa.skipped = e.kind();
    }
    run.proposals.push_back(std::move(pa));
  }
  return run;
}

}  // namespace partisan
