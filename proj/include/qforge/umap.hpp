#pragma once

#include "qforge/common.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace qforge::umap {

using IndexMatrix = Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseWeights = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// k nearest neighbours of every point, self excluded, ascending by distance.
struct KnnGraph {
  IndexMatrix indices;
  RowMatrixd distances;

  std::size_t size() const { return static_cast<std::size_t>(indices.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(indices.cols()); }
};

namespace detail {

template <typename Scalar>
void select_nearest(const Eigen::VectorXd& dist, Eigen::Index self, std::size_t k, KnnGraph& graph) {
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(dist.size()));
  for (Eigen::Index j = 0; j < dist.size(); ++j)
    if (j != self) order.push_back(j);
  auto closer = [&](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
  for (std::size_t m = 0; m < k; ++m) {
    graph.indices(self, static_cast<Eigen::Index>(m)) = order[m];
    graph.distances(self, static_cast<Eigen::Index>(m)) = dist[order[m]];
  }
}

}  // namespace detail

// Exact brute-force kNN; ties are broken by the lower index. Cosine distance
// is 1 - cos clamped to [0, 2]. Throws DataError when n <= k or a cosine row
// is zero.
template <typename Derived>
KnnGraph knn_exact(const Eigen::MatrixBase<Derived>& points, std::size_t k, Metric metric = Metric::cosine,
                   std::size_t workers = 1) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  if (k == 0) throw ConfigError("knn: k must be positive");
  if (static_cast<std::size_t>(n) <= k)
    throw DataError("knn: need more than k=" + std::to_string(k) + " points, got " + std::to_string(n));

  const RowMatrix<Scalar> x = points;
  Eigen::VectorXd norms(n);
  if (metric == Metric::cosine) {
    for (Eigen::Index i = 0; i < n; ++i) {
      norms[i] = static_cast<double>(x.row(i).norm());
      if (!(norms[i] > 0)) throw DataError("knn: zero vector at row " + std::to_string(i) + " under cosine metric");
    }
  }

  KnnGraph graph;
  graph.indices.resize(n, static_cast<Eigen::Index>(k));
  graph.distances.resize(n, static_cast<Eigen::Index>(k));
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    Eigen::VectorXd dist;
    if (metric == Metric::cosine) {
      const Eigen::VectorXd dots = (x * x.row(i).transpose()).template cast<double>();
      dist = (1.0 - (dots.array() / (norms.array() * norms[i]))).cwiseMax(0.0).cwiseMin(2.0).matrix();
    } else {
      dist = (x.rowwise() - x.row(i)).rowwise().norm().template cast<double>();
    }
    detail::select_nearest<Scalar>(dist, i, k, graph);
  });
  return graph;
}

struct SmoothKnn {
  double rho = 0;
  double sigma = 1;
  double residual = 0;  // |sum_j exp(-max(0, d_j - rho) / sigma) - log2(k)|
};

struct SmoothKnnOptions {
  std::size_t max_iterations = 64;
  double tolerance = 1e-5;
  double min_scale = 1e-3;  // sigma floor as a fraction of the mean neighbour distance
};

// Bandwidth calibration for one point from its ascending neighbour distances
// (k = distances.size()).
SmoothKnn smooth_knn(std::span<const double> distances, const SmoothKnnOptions& options = {});
double membership_mass(std::span<const double> distances, double rho, double sigma);

// Directed membership weights exp(-max(0, d - rho_i) / sigma_i) as a sparse
// n x n matrix.
SparseWeights membership_weights(const KnnGraph& graph, std::span<const SmoothKnn> calibration);

struct FuzzyGraph {
  SparseWeights weights;  // symmetric, zero diagonal, entries in (0, 1]

  std::size_t size() const { return static_cast<std::size_t>(weights.rows()); }
};

// Probabilistic union a + b - ab of the directed weights; zero entries dropped.
FuzzyGraph fuzzy_union(const SparseWeights& directed);
FuzzyGraph fuzzy_simplicial_set(const KnnGraph& graph, const SmoothKnnOptions& options = {});

struct CurveParams {
  double a = 0;
  double b = 0;
};

// Least-squares fit of 1 / (1 + a x^(2b)) to the offset-exponential target on
// 300 points over [0, 3 * spread], Levenberg-Marquardt from a = b = 1.
CurveParams fit_curve(double min_dist = 0.1, double spread = 1.0);
double attraction_target(double x, double min_dist, double spread);

struct LayoutOptions {
  std::size_t out_dim = 5;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
  CurveParams curve{1.577, 0.895};
  std::size_t neg_samples = 5;
  double learning_rate = 1.0;
};

struct Layout {
  RowMatrixf coords;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
};

// Uniform random coordinates in [-10, 10]^out_dim from the seed.
RowMatrixf initial_layout(std::size_t n, std::size_t out_dim, std::uint64_t seed);

// Single-worker SGD: edges sampled in proportion to weight, attraction on the
// sampled edge, repulsion from neg_samples uniform negatives, learning rate
// decayed linearly to zero. Bitwise deterministic for a fixed seed.
Layout optimize_layout(const FuzzyGraph& graph, const LayoutOptions& options);

struct UmapOptions {
  std::size_t n_neighbors = 15;
  Metric metric = Metric::cosine;
  std::size_t out_dim = 5;
  std::size_t epochs = 200;
  std::size_t neg_samples = 5;
  double min_dist = 0.1;
  double spread = 1.0;
  double learning_rate = 1.0;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
};

// kNN -> fuzzy graph -> curve fit -> layout.
Layout reduce(const RowMatrixf& data, const UmapOptions& options);

void save_layout(const Layout& layout, std::span<const std::string> ids, const std::filesystem::path& payload,
                 const std::filesystem::path& manifest);
Layout load_layout(const std::filesystem::path& payload, const std::filesystem::path& manifest,
                   std::span<const std::string> expected_ids);

}  // namespace qforge::umap
