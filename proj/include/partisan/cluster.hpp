#pragma once

// k-means (k-means++ seeding, best of several Lloyd restarts) and
// silhouette-based selection of the cluster count.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "partisan/embed.hpp"
#include "partisan/rng.hpp"

namespace partisan {

struct KmeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct KmeansResult {
  std::vector<int> assignments;
  Coords centroids;
  double wcss = 0.0;
  /// Per restart, the within-cluster sum of squares after every Lloyd step.
  std::vector<std::vector<double>> wcss_trace;
};

inline double squared_distance(const Point2& a, const Point2& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double wcss(const Coords& pts, const std::vector<int>& labels, const Coords& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += squared_distance(pts[i], centroids[static_cast<std::size_t>(labels[i])]);
  return s;
}

namespace detail {

inline Coords kmeanspp_seed(const Coords& pts, int k, Rng& rng) {
  Coords centers;
  centers.push_back(pts[rng.below(pts.size())]);
  std::vector<double> d2(pts.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, squared_distance(pts[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(pts[rng.below(pts.size())]);
      continue;
    }
    double target = rng.uniform() * total;
    std::size_t pick = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      target -= d2[i];
      if (target < 0.0 && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[pick] <= 0.0 && pick > 0) --pick;
    centers.push_back(pts[pick]);
  }
  return centers;
}

inline Coords centroids_of(const Coords& pts, const std::vector<int>& labels, int k) {
  Coords c(static_cast<std::size_t>(k));
  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto l = static_cast<std::size_t>(labels[i]);
    c[l].x += pts[i].x;
    c[l].y += pts[i].y;
    ++count[l];
  }
  for (std::size_t l = 0; l < c.size(); ++l) {
    c[l].x /= static_cast<double>(count[l]);
    c[l].y /= static_cast<double>(count[l]);
  }
  return c;
}

/// Assigns every point to its nearest center (lowest index on ties), then
/// gives each empty cluster the point farthest from its center among
/// clusters that can spare one.
inline std::vector<int> assign(const Coords& pts, const Coords& centers) {
  const int k = static_cast<int>(centers.size());
  std::vector<int> labels(pts.size());
  std::vector<std::size_t> count(centers.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int best = 0;
    double best_d = squared_distance(pts[i], centers[0]);
    for (int c = 1; c < k; ++c) {
      double d = squared_distance(pts[i], centers[static_cast<std::size_t>(c)]);
      if (d < best_d) best = c, best_d = d;
    }
    labels[i] = best;
    ++count[static_cast<std::size_t>(best)];
  }
  for (int c = 0; c < k; ++c) {
    if (count[static_cast<std::size_t>(c)] != 0) continue;
    std::size_t far = pts.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto l = static_cast<std::size_t>(labels[i]);
      if (count[l] < 2) continue;
      double d = squared_distance(pts[i], centers[l]);
      if (d > far_d) far = i, far_d = d;
    }
    --count[static_cast<std::size_t>(labels[far])];
    labels[far] = c;
    ++count[static_cast<std::size_t>(c)];
  }
  return labels;
}

/// Renumbers labels in order of first appearance.
inline void canonicalize(std::vector<int>& labels, Coords& centroids) {
  std::vector<int> remap(centroids.size(), -1);
  int next = 0;
  for (int l : labels)
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
  Coords c(centroids.size());
  for (std::size_t l = 0; l < centroids.size(); ++l) c[static_cast<std::size_t>(remap[l])] = centroids[l];
  for (int& l : labels) l = remap[static_cast<std::size_t>(l)];
  centroids = std::move(c);
}

}  // namespace detail

inline KmeansResult kmeans(const Coords& pts, int k, std::uint64_t seed, const KmeansOptions& opt = {}) {
  if (k < 1) throw PreconditionError("k must be positive");
  if (static_cast<std::size_t>(k) > pts.size())
    throw TooFewPoints("k=" + std::to_string(k) + " exceeds " + std::to_string(pts.size()) + " points");

  Rng rng(seed);
  KmeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Coords centers = detail::kmeanspp_seed(pts, k, rng);
    std::vector<int> labels = detail::assign(pts, centers);
    centers = detail::centroids_of(pts, labels, k);
    std::vector<double> trace{wcss(pts, labels, centers)};
    for (int it = 1; it < opt.max_iterations; ++it) {
      auto next = detail::assign(pts, centers);
      if (next == labels) break;
      labels = std::move(next);
      centers = detail::centroids_of(pts, labels, k);
      trace.push_back(wcss(pts, labels, centers));
    }
    best.wcss_trace.push_back(trace);
    if (trace.back() < best.wcss) {
      best.wcss = trace.back();
      best.assignments = labels;
      best.centroids = centers;
    }
  }
  detail::canonicalize(best.assignments, best.centroids);
  return best;
}

struct Silhouette {
  std::vector<double> per_point;
  double mean = 0.0;
};

/// Euclidean silhouette. Points in singleton clusters score 0, as do points
/// with a(i) = b(i) = 0.
inline Silhouette silhouette(const Coords& pts, const std::vector<int>& labels) {
  if (labels.size() != pts.size()) throw PreconditionError("label count does not match point count");
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw PreconditionError("negative cluster label");
    k = std::max(k, l + 1);
  }
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++size[static_cast<std::size_t>(l)];
  if (std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; }) < 2)
    throw SingleCluster("silhouette needs at least two non-empty clusters");

  Silhouette out;
  out.per_point.resize(pts.size());
  std::vector<double> sum(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (size[own] < 2) {
      out.per_point[i] = 0.0;
      continue;
    }
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) sum[static_cast<std::size_t>(labels[j])] += distance(pts[i], pts[j]);
    double a = sum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum.size(); ++c)
      if (c != own && size[c] > 0) b = std::min(b, sum[c] / static_cast<double>(size[c]));
    double denom = std::max(a, b);
    out.per_point[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  double total = 0.0;
  for (double s : out.per_point) total += s;
  out.mean = total / static_cast<double>(pts.size());
  return out;
}

struct ClusteringResult {
  std::uint64_t proposal_id = 0;
  std::vector<Address> addresses;  // parallel to assignments
  std::vector<int> assignments;
  int k_star = 0;
  std::map<int, double> silhouette_by_k;
  Coords centroids;
  std::uint64_t seed = 0;
};

/// Picks k in [k_min, min(k_max, n)] maximizing mean silhouette; ties go to
/// the smaller k. Each k uses its own seed derived from `seed`.
inline ClusteringResult select_k(const Coords& pts, int k_min, int k_max, std::uint64_t seed,
                                 const KmeansOptions& opt = {}) {
  if (pts.size() < 2) throw TooFewPoints("need at least 2 points to cluster");
  if (k_min < 2) throw PreconditionError("k_min must be >= 2");
  if (static_cast<std::size_t>(k_min) > pts.size())
    throw TooFewPoints("k_min=" + std::to_string(k_min) + " exceeds " + std::to_string(pts.size()) + " points");
  k_max = std::min<int>(k_max, static_cast<int>(pts.size()));

  ClusteringResult out;
  out.seed = seed;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    auto km = kmeans(pts, k, derive_seed(seed, SeedStage::kKmeans, {static_cast<std::uint64_t>(k)}), opt);
    double s = silhouette(pts, km.assignments).mean;
    out.silhouette_by_k[k] = s;
    if (s > best) {
      best = s;
      out.k_star = k;
      out.assignments = std::move(km.assignments);
      out.centroids = std::move(km.centroids);
    }
  }
  return out;
}

}  // namespace partisan
