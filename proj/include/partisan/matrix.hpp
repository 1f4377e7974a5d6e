#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "partisan/address.hpp"
#include "partisan/error.hpp"
#include "partisan/ingest.hpp"

namespace partisan {

enum Vote : std::int8_t { kNoVote = -1, kNo = 0, kYes = 1, kAbstain = 2 };

/// Addresses x proposals matrix of collapsed vote states. Rows are sorted
/// addresses, columns strictly increasing proposal ids; every row and every
/// column holds at least one yes/no vote.
class VoterMatrix {
 public:
  VoterMatrix() = default;
  VoterMatrix(std::vector<Address> addresses, std::vector<std::uint64_t> proposal_ids,
              std::vector<std::int8_t> cells)
      : addresses_(std::move(addresses)), proposal_ids_(std::move(proposal_ids)), cells_(std::move(cells)) {
    if (cells_.size() != addresses_.size() * proposal_ids_.size())
      throw PreconditionError("voter matrix cell count does not match dimensions");
  }

  std::size_t rows() const { return addresses_.size(); }
  std::size_t cols() const { return proposal_ids_.size(); }
  const std::vector<Address>& addresses() const { return addresses_; }
  const std::vector<std::uint64_t>& proposal_ids() const { return proposal_ids_; }

  std::int8_t at(std::size_t row, std::size_t col) const { return cells_[row * cols() + col]; }
  std::int8_t& at(std::size_t row, std::size_t col) { return cells_[row * cols() + col]; }
  static bool valid(std::int8_t cell) { return cell == kYes || cell == kNo; }

  std::optional<std::size_t> row_of(const Address& a) const {
    auto it = std::lower_bound(addresses_.begin(), addresses_.end(), a);
    if (it == addresses_.end() || *it != a) return std::nullopt;
    return static_cast<std::size_t>(it - addresses_.begin());
  }

  std::optional<std::size_t> col_of(std::uint64_t proposal_id) const {
    auto it = std::lower_bound(proposal_ids_.begin(), proposal_ids_.end(), proposal_id);
    if (it == proposal_ids_.end() || *it != proposal_id) return std::nullopt;
    return static_cast<std::size_t>(it - proposal_ids_.begin());
  }

  std::size_t require_col(std::uint64_t proposal_id) const {
    auto c = col_of(proposal_id);
    if (!c) throw UnknownProposal("proposal " + std::to_string(proposal_id) + " not in matrix");
    return *c;
  }

  bool operator==(const VoterMatrix&) const = default;

 private:
  std::vector<Address> addresses_;
  std::vector<std::uint64_t> proposal_ids_;
  std::vector<std::int8_t> cells_;
};

struct MatrixBuildOptions {
  /// Keep abstentions as 2 instead of collapsing them into -1.
  bool retain_abstain = false;
};

inline std::int8_t collapse_support(std::int64_t support, bool retain_abstain = false) {
  if (support == 1) return kYes;
  if (support == 0) return kNo;
  if (support == 2 && retain_abstain) return kAbstain;
  return kNoVote;
}

/// Events must already be deduplicated per (voter, proposal).
inline VoterMatrix build_voter_matrix(const std::vector<VoteEvent>& events, MatrixBuildOptions opt = {}) {
  std::set<Address> voters;
  std::set<std::uint64_t> proposals;
  for (const auto& e : events) {
    if (VoterMatrix::valid(collapse_support(e.support))) {
      voters.insert(e.voter);
      proposals.insert(e.proposal_id);
    }
  }
  if (voters.empty()) throw EmptyInput("no yes/no votes among " + std::to_string(events.size()) + " events");

  std::vector<Address> rows(voters.begin(), voters.end());
  std::vector<std::uint64_t> cols(proposals.begin(), proposals.end());
  VoterMatrix m(rows, cols, std::vector<std::int8_t>(rows.size() * cols.size(), kNoVote));
  for (const auto& e : events) {
    auto r = m.row_of(e.voter);
    auto c = m.col_of(e.proposal_id);
    if (!r || !c) continue;
    m.at(*r, *c) = collapse_support(e.support, opt.retain_abstain);
  }
  return m;
}

struct ColumnVotes {
  std::size_t yes_count = 0;
  std::size_t no_count = 0;
  std::vector<Address> voters;
};

inline ColumnVotes column_votes(const VoterMatrix& m, std::uint64_t proposal_id) {
  const auto c = m.require_col(proposal_id);
  ColumnVotes out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto v = m.at(r, c);
    if (v == kYes) ++out.yes_count;
    if (v == kNo) ++out.no_count;
    if (VoterMatrix::valid(v)) out.voters.push_back(m.addresses()[r]);
  }
  return out;
}

inline void write_matrix_csv(std::ostream& out, const VoterMatrix& m) {
  out << "address";
  for (auto p : m.proposal_ids()) out << ',' << p;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.addresses()[r].hex();
    for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << static_cast<int>(m.at(r, c));
    out << '\n';
  }
}

}  // namespace partisan
