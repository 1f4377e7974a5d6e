#pragma once

// Metric MDS by stress majorization (SMACOF) with warm starts along the
// proposal sequence.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <unordered_map>
#include <vector>

#include "partisan/dissim.hpp"
#include "partisan/rng.hpp"

namespace partisan {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

using Coords = std::vector<Point2>;

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct MdsConfig {
  int max_iterations = 300;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

struct Embedding {
  std::uint64_t proposal_id = 0;
  std::vector<Address> addresses;
  Coords coords;
  double stress = 0.0;
  int iterations_used = 0;
  std::uint64_t seed = 0;
  /// Stress of the initial configuration followed by one entry per iteration.
  std::vector<double> stress_history;
};

/// Normalized stress: sqrt( sum_{i<k} (d_ik - |x_i - x_k|)^2 / sum_{i<k} d_ik^2 ).
inline double stress(const DissimilarityMatrix& d, const Coords& coords) {
  if (coords.size() != d.size()) throw PreconditionError("coordinate count does not match dissimilarity size");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t k = i + 1; k < d.size(); ++k) {
      double diff = d.at(i, k) - distance(coords[i], coords[k]);
      num += diff * diff;
      den += d.at(i, k) * d.at(i, k);
    }
  }
  if (den == 0.0) throw AllZeroDissimilarity("all dissimilarities are zero");
  return std::sqrt(num / den);
}

namespace detail {

inline Coords random_unit_square(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Coords out(n);
  for (auto& p : out) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  return out;
}

/// One Guttman transform with unit weights.
inline Coords guttman_transform(const DissimilarityMatrix& d, const Coords& x) {
  const std::size_t n = x.size();
  Coords out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      double dist = distance(x[i], x[k]);
      if (dist <= 0.0) continue;
      double ratio = d.at(i, k) / dist;
      sx += ratio * (x[i].x - x[k].x);
      sy += ratio * (x[i].y - x[k].y);
    }
    out[i] = {sx / static_cast<double>(n), sy / static_cast<double>(n)};
  }
  return out;
}

inline bool all_coincident(const Coords& x) {
  for (const auto& p : x)
    if (p != x.front()) return false;
  return true;
}

}  // namespace detail

/// Runs SMACOF from `init` (or a seeded random start). Stops when the
/// relative stress decrease falls below `tolerance` or after
/// `max_iterations` transforms.
inline Embedding mds_embed(const DissimilarityMatrix& d, const std::optional<Coords>& init, const MdsConfig& cfg) {
  const std::size_t n = d.size();
  if (n < 2) throw PreconditionError("MDS needs at least 2 points");
  if (cfg.tolerance <= 0.0 || cfg.max_iterations < 1) throw PreconditionError("invalid MDS configuration");
  bool any_nonzero = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(d.at(i, k))) throw NonFiniteInput("non-finite dissimilarity");
      any_nonzero = any_nonzero || d.at(i, k) != 0.0;
    }
  }
  if (!any_nonzero) throw AllZeroDissimilarity("proposal " + std::to_string(d.proposal_id()) + ": all dissimilarities are zero");

  Coords x;
  if (init) {
    if (init->size() != n) throw PreconditionError("initial configuration has wrong row count");
    for (const auto& p : *init)
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw NonFiniteInput("non-finite initial coordinate");
    x = *init;
  }
  // A fully collapsed start is a fixed point of the transform.
  if (!init || detail::all_coincident(x)) x = detail::random_unit_square(n, cfg.seed);

  Embedding e;
  e.proposal_id = d.proposal_id();
  e.addresses = d.addresses();
  e.seed = cfg.seed;
  double current = stress(d, x);
  e.stress_history.push_back(current);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    x = detail::guttman_transform(d, x);
    double next = stress(d, x);
    e.stress_history.push_back(next);
    e.iterations_used = it;
    bool converged = current <= 0.0 || (current - next) / current < cfg.tolerance;
    current = next;
    if (converged) break;
  }
  e.coords = std::move(x);
  e.stress = current;
  return e;
}

/// Initial coordinates for `current_addresses`: carried over from
/// `previous` where present, otherwise jittered around the previous centroid
/// within 1% of its spread. Without a previous embedding, points are drawn
/// from the unit square.
inline Coords warm_start(const std::optional<Embedding>& previous, const std::vector<Address>& current_addresses,
                         std::uint64_t seed) {
  if (!previous || previous->coords.empty()) return detail::random_unit_square(current_addresses.size(), seed);

  std::unordered_map<Address, Point2> carried;
  Point2 centroid;
  double min_x = INFINITY, max_x = -INFINITY, min_y = INFINITY, max_y = -INFINITY;
  for (std::size_t i = 0; i < previous->addresses.size(); ++i) {
    const auto& p = previous->coords[i];
    carried.emplace(previous->addresses[i], p);
    centroid.x += p.x;
    centroid.y += p.y;
    min_x = std::min(min_x, p.x), max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y), max_y = std::max(max_y, p.y);
  }
  centroid.x /= static_cast<double>(previous->coords.size());
  centroid.y /= static_cast<double>(previous->coords.size());
  double spread = std::max(max_x - min_x, max_y - min_y);
  double radius = 0.01 * (spread > 0.0 ? spread : 1.0);

  Coords out;
  out.reserve(current_addresses.size());
  for (const auto& a : current_addresses) {
    if (auto it = carried.find(a); it != carried.end()) {
      out.push_back(it->second);
      continue;
    }
    // Per-address stream, so the jitter does not depend on which other
    // addresses are new.
    std::uint64_t state = seed ^ std::hash<Address>{}(a);
    Rng rng(splitmix64(state));
    double r = radius * std::sqrt(rng.uniform());
    double theta = 2.0 * std::numbers::pi * rng.uniform();
    out.push_back({centroid.x + r * std::cos(theta), centroid.y + r * std::sin(theta)});
  }
  return out;
}

}  // namespace partisan
