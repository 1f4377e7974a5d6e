#pragma once

// Sliding-window active voter selection and pairwise vote dissimilarity.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "partisan/matrix.hpp"

namespace partisan {

struct WindowSpec {
  std::size_t window_size = 10;
  double participation_threshold = 0.40;
};

/// Trailing `w` proposals ending at 1-based position `j` of the surviving
/// column list.
inline std::vector<std::uint64_t> sliding_window(const std::vector<std::uint64_t>& proposal_ids, std::size_t j,
                                                 std::size_t w) {
  if (j < 1 || j > proposal_ids.size())
    throw IndexOutOfRange("window position " + std::to_string(j) + " outside 1.." +
                          std::to_string(proposal_ids.size()));
  if (w < 1) throw PreconditionError("window size must be >= 1");
  std::size_t first = j > w ? j - w : 0;  // 0-based start
  return {proposal_ids.begin() + static_cast<std::ptrdiff_t>(first),
          proposal_ids.begin() + static_cast<std::ptrdiff_t>(j)};
}

inline double participation(const VoterMatrix& m, const Address& address, const std::vector<std::uint64_t>& window) {
  if (window.empty()) throw PreconditionError("participation window is empty");
  auto row = m.row_of(address);
  if (!row) throw UnknownAddress(address.hex() + " not in matrix");
  std::size_t voted = 0;
  for (auto p : window) voted += m.at(*row, m.require_col(p)) >= 0;
  return static_cast<double>(voted) / static_cast<double>(window.size());
}

struct ActiveSet {
  std::uint64_t proposal_id = 0;
  std::vector<std::uint64_t> window;
  std::vector<Address> addresses;
  std::vector<double> participation;  // parallel to addresses

  bool operator==(const ActiveSet&) const = default;
};

/// Active voters for the proposal at 1-based position `j` (j >= 2).
inline ActiveSet active_set(const VoterMatrix& m, std::size_t j, const WindowSpec& spec) {
  if (j < 2) throw PreconditionError("the first proposal has no analysable window");
  ActiveSet out;
  out.window = sliding_window(m.proposal_ids(), j, spec.window_size);
  out.proposal_id = m.proposal_ids()[j - 1];
  const std::size_t last = j - 1, first = last + 1 - out.window.size();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t voted = 0;
    for (std::size_t c = first; c <= last; ++c) voted += m.at(r, c) >= 0;
    double pi = static_cast<double>(voted) / static_cast<double>(out.window.size());
    if (pi >= spec.participation_threshold) {
      out.addresses.push_back(m.addresses()[r]);
      out.participation.push_back(pi);
    }
  }
  if (out.addresses.size() < 2)
    throw EmptyActiveSet("proposal " + std::to_string(out.proposal_id) + ": " +
                         std::to_string(out.addresses.size()) + " active addresses (need 2)");
  return out;
}

class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  DissimilarityMatrix(std::uint64_t proposal_id, std::vector<Address> addresses)
      : proposal_id_(proposal_id), addresses_(std::move(addresses)), cells_(addresses_.size() * addresses_.size(), 0.0) {}

  std::uint64_t proposal_id() const { return proposal_id_; }
  const std::vector<Address>& addresses() const { return addresses_; }
  std::size_t size() const { return addresses_.size(); }
  double at(std::size_t i, std::size_t k) const { return cells_[i * size() + k]; }
  void set(std::size_t i, std::size_t k, double v) {
    cells_[i * size() + k] = v;
    cells_[k * size() + i] = v;
  }

  bool operator==(const DissimilarityMatrix&) const = default;

 private:
  std::uint64_t proposal_id_ = 0;
  std::vector<Address> addresses_;
  std::vector<double> cells_;
};

/// Fraction of co-voted window proposals on which two addresses differ;
/// 1 when they never co-voted.
inline DissimilarityMatrix dissimilarity_matrix(const VoterMatrix& m, const ActiveSet& active) {
  const std::size_t n = active.addresses.size();
  if (n < 2) throw PreconditionError("dissimilarity needs at least 2 addresses");

  // Gather the filtered submatrix V' (rows A_j, columns W_j).
  const std::size_t w = active.window.size();
  std::vector<std::size_t> cols(w);
  for (std::size_t l = 0; l < w; ++l) cols[l] = m.require_col(active.window[l]);
  std::vector<std::int8_t> sub(n * w);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.row_of(active.addresses[i]);
    if (!row) throw UnknownAddress(active.addresses[i].hex() + " not in matrix");
    for (std::size_t l = 0; l < w; ++l) sub[i * w + l] = m.at(*row, cols[l]);
  }

  DissimilarityMatrix d(active.proposal_id, active.addresses);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      std::size_t shared = 0, opposing = 0;
      for (std::size_t l = 0; l < w; ++l) {
        auto a = sub[i * w + l], b = sub[k * w + l];
        if (a >= 0 && b >= 0) {
          ++shared;
          opposing += a != b;
        }
      }
      d.set(i, k, shared ? static_cast<double>(opposing) / static_cast<double>(shared) : 1.0);
    }
  }
  return d;
}

inline void write_dissimilarity_csv(std::ostream& out, const DissimilarityMatrix& d) {
  out << "address";
  for (const auto& a : d.addresses()) out << ',' << a.hex();
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.addresses()[i].hex();
    for (std::size_t k = 0; k < d.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.6f", d.at(i, k));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace partisan
