#pragma once

#include "qforge/common.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace qforge::hdbscan {

inline constexpr int kNoise = -1;

// Euclidean distance from every point to its min_samples-th nearest
// neighbour, self excluded. Throws DataError when min_samples >= n.
template <typename Derived>
std::vector<double> core_distances(const Eigen::MatrixBase<Derived>& points, std::size_t min_samples,
                                   std::size_t workers = 1) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (min_samples == 0) throw ConfigError("min_samples must be positive");
  if (min_samples >= n)
    throw DataError("core distances: min_samples=" + std::to_string(min_samples) + " needs more than " +
                    std::to_string(min_samples) + " points, got " + std::to_string(n));
  const RowMatrix<typename Derived::Scalar> x = points;
  std::vector<double> cores(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::VectorXd dist = (x.rowwise() - x.row(row)).rowwise().norm().template cast<double>();
    std::vector<double> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(dist[static_cast<Eigen::Index>(j)]);
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), others.end());
    cores[i] = others[min_samples - 1];
  });
  return cores;
}

inline double mutual_reachability(double distance, double core_i, double core_j) {
  return std::max({core_i, core_j, distance});
}

struct MstEdge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double weight = 0;
};

// Orders edges by weight, then by (min endpoint, max endpoint).
inline bool edge_before(const MstEdge& a, const MstEdge& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

// Prim's algorithm over the dense mutual-reachability graph, O(n^2).
template <typename Derived>
std::vector<MstEdge> mst(const Eigen::MatrixBase<Derived>& points, std::span<const double> cores) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (cores.size() != n) throw Error("mst: core distance count does not match the point count");
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  const RowMatrix<typename Derived::Scalar> x = points;

  std::vector<bool> in_tree(n, false);
  std::vector<MstEdge> best(n, MstEdge{0, 0, std::numeric_limits<double>::infinity()});
  auto relax = [&](std::size_t from) {
    const auto row = static_cast<Eigen::Index>(from);
    const Eigen::VectorXd dist = (x.rowwise() - x.row(row)).rowwise().norm().template cast<double>();
    for (std::size_t k = 0; k < n; ++k) {
      if (in_tree[k]) continue;
      const MstEdge candidate{std::min(from, k), std::max(from, k),
                              mutual_reachability(dist[static_cast<Eigen::Index>(k)], cores[from], cores[k])};
      if (edge_before(candidate, best[k])) best[k] = candidate;
    }
  };

  in_tree[0] = true;
  relax(0);
  edges.reserve(n - 1);
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t k = 0; k < n; ++k)
      if (!in_tree[k] && (next == n || edge_before(best[k], best[next]))) next = k;
    in_tree[next] = true;
    edges.push_back(best[next]);
    relax(next);
  }
  return edges;
}

struct CondensedCluster {
  int parent = -1;  // -1 for the root
  double lambda_birth = 0;
  double lambda_death = 0;
  std::size_t size = 0;
  std::vector<std::size_t> children;
};

// A point leaving `cluster` at `lambda` (either noise fall-out or the point's
// final cluster in the hierarchy).
struct PointFallout {
  std::size_t point = 0;
  std::size_t cluster = 0;
  double lambda = 0;
};

struct CondensedTree {
  std::size_t n_points = 0;
  std::size_t min_cluster_size = 0;
  std::vector<CondensedCluster> clusters;  // clusters[0] is the root; children follow parents
  std::vector<PointFallout> points;        // one entry per point

  // Sum over the cluster's points of (lambda at which it leaves) - birth.
  std::vector<double> stability() const;
  std::string to_json() const;
};

// Single-linkage dendrogram from the ascending MST edges (zero-weight edges
// pre-merge points into atoms), condensed so that a split only counts when
// both sides have at least min_cluster_size points. lambda = 1 / weight.
CondensedTree condense(std::span<const MstEdge> edges, std::size_t n_points, std::size_t min_cluster_size);

struct ClusterLabels {
  std::vector<int> labels;               // per point: dense cluster id or kNoise
  std::vector<double> stability;         // per output cluster
  std::vector<std::size_t> tree_nodes;   // condensed-tree node of each output cluster

  std::size_t n_clusters() const { return stability.size(); }
  std::size_t noise_count() const;
};

// Excess-of-mass selection: a cluster is kept when its stability is at least
// the summed stability of its selected descendants. The root is never
// selected.
ClusterLabels extract_clusters(const CondensedTree& tree);

struct ClusterResult {
  CondensedTree tree;
  ClusterLabels labels;
};

// core distances -> MST -> condense -> extract, euclidean in point space.
// min_samples == 0 means min_samples = min_cluster_size.
ClusterResult cluster(const RowMatrixd& points, std::size_t min_cluster_size, std::size_t min_samples = 0,
                      std::size_t workers = 1);

std::string labels_csv(std::span<const std::string> ids, const ClusterLabels& labels);

}  // namespace qforge::hdbscan
