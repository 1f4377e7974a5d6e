#pragma once

// Planted two-bloc DAO generator used for the bundled fixture and tests.
//
// For every proposal the majority bloc takes a random line (yes/no) and the
// minority bloc takes the same line with probability `across_agreement`.
// Each voter turns out with probability `participation` and then follows
// its bloc's line with probability `within_agreement`.

#include <cstdint>
#include <string>
#include <vector>

#include "partisan/ingest.hpp"
#include "partisan/keccak.hpp"
#include "partisan/rng.hpp"

namespace partisan {

struct PlantedSpec {
  std::size_t majority_size = 20;
  std::size_t minority_size = 10;
  std::size_t proposals = 60;
  double within_agreement = 0.9;
  double across_agreement = 0.2;
  double participation = 0.8;
  std::uint64_t seed = 0;
};

struct PlantedDao {
  std::vector<VoteEvent> events;  // chain order
  std::vector<Address> majority;
  std::vector<Address> minority;  // the planted "fork" bloc

  ForkGroundTruth minority_truth(std::string label = "planted") const {
    ForkGroundTruth gt;
    gt.fork_label = std::move(label);
    gt.addresses.insert(minority.begin(), minority.end());
    return gt;
  }
};

inline Address planted_address(std::uint64_t seed, std::size_t index) {
  auto h = keccak256("planted-voter-" + std::to_string(seed) + "-" + std::to_string(index));
  Address::Bytes b{};
  std::copy(h.begin() + 12, h.end(), b.begin());
  return Address(b);
}

inline PlantedDao generate_planted_dao(const PlantedSpec& spec) {
  PlantedDao dao;
  const std::size_t n = spec.majority_size + spec.minority_size;
  std::vector<Address> voters(n);
  for (std::size_t i = 0; i < n; ++i) {
    voters[i] = planted_address(spec.seed, i);
    (i < spec.majority_size ? dao.majority : dao.minority).push_back(voters[i]);
  }
  Rng rng(derive_seed(spec.seed, SeedStage::kSynthetic));
  for (std::size_t p = 1; p <= spec.proposals; ++p) {
    const int majority_line = rng.uniform() < 0.5 ? 1 : 0;
    const int minority_line = rng.uniform() < spec.across_agreement ? majority_line : 1 - majority_line;
    std::uint64_t log_index = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool turns_out = rng.uniform() < spec.participation;
      const bool loyal = rng.uniform() < spec.within_agreement;
      if (!turns_out) continue;
      const int line = i < spec.majority_size ? majority_line : minority_line;
      VoteEvent e;
      e.voter = voters[i];
      e.proposal_id = p;
      e.support = loyal ? line : 1 - line;
      e.block_number = 1000 + 100 * p;
      e.log_index = log_index++;
      dao.events.push_back(e);
    }
  }
  return dao;
}

}  // namespace partisan
