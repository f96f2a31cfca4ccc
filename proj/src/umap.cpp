#include "qforge/umap.hpp"

#include "qforge/io.hpp"

#include <json.hpp>

#include <cassert>
#include <limits>
#include <random>

namespace qforge::umap {

double membership_mass(std::span<const double> distances, double rho, double sigma) {
  double sum = 0;
  for (double d : distances) {
    const double excess = d - rho;
    sum += excess > 0 ? std::exp(-excess / sigma) : 1.0;
  }
  return sum;
}

SmoothKnn smooth_knn(std::span<const double> distances, const SmoothKnnOptions& options) {
  SmoothKnn out;
  if (distances.empty()) return out;
  const double target = std::log2(static_cast<double>(distances.size()));
  for (double d : distances)
    if (d > 0) {
      out.rho = d;
      break;
    }

  double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const double mass = membership_mass(distances, out.rho, mid);
    if (std::abs(mass - target) < options.tolerance) break;
    if (mass > target) {
      hi = mid;
      mid = (lo + hi) / 2.0;
    } else {
      lo = mid;
      mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
    }
  }

  const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) / static_cast<double>(distances.size());
  const double floor = options.min_scale * (mean > 0 ? mean : 1.0);
  out.sigma = std::max(mid, floor);
  out.residual = std::abs(membership_mass(distances, out.rho, out.sigma) - target);
  return out;
}

SparseWeights membership_weights(const KnnGraph& graph, std::span<const SmoothKnn> calibration) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.size() * graph.k());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cal = calibration[static_cast<std::size_t>(i)];
    for (Eigen::Index m = 0; m < graph.indices.cols(); ++m) {
      const double excess = graph.distances(i, m) - cal.rho;
      const double w = excess > 0 ? std::exp(-excess / cal.sigma) : 1.0;
      if (w > 0) triplets.emplace_back(i, graph.indices(i, m), w);
    }
  }
  SparseWeights p(n, n);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return p;
}

FuzzyGraph fuzzy_union(const SparseWeights& directed) {
  const SparseWeights transposed = directed.transpose();
  FuzzyGraph graph;
  graph.weights = directed + transposed - directed.cwiseProduct(transposed);
  graph.weights.prune([](Eigen::Index row, Eigen::Index col, double w) { return row != col && w > 0; });
  graph.weights.makeCompressed();
  return graph;
}

FuzzyGraph fuzzy_simplicial_set(const KnnGraph& graph, const SmoothKnnOptions& options) {
  std::vector<SmoothKnn> calibration(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto row = graph.distances.row(static_cast<Eigen::Index>(i));
    calibration[i] = smooth_knn(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), options);
  }
  return fuzzy_union(membership_weights(graph, calibration));
}

double attraction_target(double x, double min_dist, double spread) {
  return x < min_dist ? 1.0 : std::exp(-(x - min_dist) / spread);
}

CurveParams fit_curve(double min_dist, double spread) {
  if (!(min_dist < spread) || !(spread > 0) || min_dist < 0)
    throw ConfigError("fit_curve: need 0 <= min_dist < spread");

  constexpr int kPoints = 300;
  Eigen::ArrayXd xs = Eigen::ArrayXd::LinSpaced(kPoints, 0.0, 3.0 * spread);
  Eigen::ArrayXd ys = xs.unaryExpr([&](double x) { return attraction_target(x, min_dist, spread); });
  // x^(2b) and log(x) vanish at x = 0; the log is only needed where x > 0.
  const Eigen::ArrayXd log_xs = xs.unaryExpr([](double x) { return x > 0 ? std::log(x) : 0.0; });

  auto powers = [&](double b) { return xs.unaryExpr([b](double x) { return x > 0 ? std::pow(x, 2.0 * b) : 0.0; }); };
  auto sse = [&](double a, double b) {
    return ((1.0 / (1.0 + a * powers(b))) - ys).square().sum();
  };

  double a = 1.0, b = 1.0, damping = 1e-3;
  double cost = sse(a, b);
  for (int iter = 0; iter < 300; ++iter) {
    const Eigen::ArrayXd p = powers(b);
    const Eigen::ArrayXd denom = 1.0 + a * p;
    const Eigen::ArrayXd residual = 1.0 / denom - ys;
    Eigen::MatrixXd jac(kPoints, 2);
    jac.col(0) = (-p / denom.square()).matrix();
    jac.col(1) = (-2.0 * a * p * log_xs / denom.square()).matrix();
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * residual.matrix();
    if (jtr.norm() < 1e-14) return {a, b};

    // Raise damping until the step lowers the cost.
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      Eigen::Matrix2d lhs = jtj;
      lhs.diagonal() += damping * jtj.diagonal();
      const Eigen::Vector2d step = lhs.ldlt().solve(-jtr);
      const double na = a + step[0], nb = b + step[1];
      const double next = (na > 0 && nb > 0) ? sse(na, nb) : std::numeric_limits<double>::infinity();
      if (next < cost) {
        const double improvement = cost - next;
        a = na;
        b = nb;
        cost = next;
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
        if (improvement <= 1e-15 * std::max(cost, 1e-30) || step.norm() < 1e-12) return {a, b};
      } else {
        damping *= 10.0;
      }
    }
    // No damping level improves the cost: at a minimum up to rounding.
    if (!accepted) return {a, b};
  }
  throw Error("fit_curve: Levenberg-Marquardt did not converge in 300 iterations");
}

namespace {

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, n) without modulo bias concerns at these sizes.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }
  // Uniform float in [0, 1) from the top 24 bits.
  float unit() { return static_cast<float>(engine_() >> 40) * (1.0f / 16777216.0f); }

 private:
  std::mt19937_64 engine_;
};

float clip(float v) { return std::clamp(v, -4.0f, 4.0f); }

}  // namespace

RowMatrixf initial_layout(std::size_t n, std::size_t out_dim, std::uint64_t seed) {
  Random rng(seed);
  RowMatrixf coords(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out_dim));
  for (Eigen::Index i = 0; i < coords.rows(); ++i)
    for (Eigen::Index d = 0; d < coords.cols(); ++d) coords(i, d) = 20.0f * rng.unit() - 10.0f;
  return coords;
}

Layout optimize_layout(const FuzzyGraph& graph, const LayoutOptions& options) {
  if (options.out_dim == 0) throw ConfigError("layout dimension must be positive");
  const std::size_t n = graph.size();
  Layout layout;
  layout.seed = options.seed;
  layout.epochs = options.epochs;
  layout.coords = initial_layout(n, options.out_dim, options.seed);
  if (options.epochs == 0 || graph.weights.nonZeros() == 0) return layout;

  // Edge list in row-major order, both directions of every symmetric pair.
  std::vector<Eigen::Index> head, tail;
  std::vector<double> weight;
  double max_weight = 0;
  for (Eigen::Index i = 0; i < graph.weights.outerSize(); ++i)
    for (SparseWeights::InnerIterator it(graph.weights, i); it; ++it) max_weight = std::max(max_weight, it.value());
  const double cutoff = max_weight / static_cast<double>(options.epochs);
  for (Eigen::Index i = 0; i < graph.weights.outerSize(); ++i)
    for (SparseWeights::InnerIterator it(graph.weights, i); it; ++it) {
      if (it.value() < cutoff) continue;
      head.push_back(it.row());
      tail.push_back(it.col());
      weight.push_back(it.value());
    }

  const std::size_t edges = head.size();
  const auto epochs = static_cast<double>(options.epochs);
  const auto neg_rate = static_cast<double>(options.neg_samples);
  std::vector<double> epochs_per_sample(edges), next_sample(edges), epochs_per_negative(edges), next_negative(edges);
  for (std::size_t e = 0; e < edges; ++e) {
    epochs_per_sample[e] = max_weight / weight[e];
    next_sample[e] = epochs_per_sample[e];
    epochs_per_negative[e] = neg_rate > 0 ? epochs_per_sample[e] / neg_rate : std::numeric_limits<double>::infinity();
    next_negative[e] = epochs_per_negative[e];
  }

  const auto a = static_cast<float>(options.curve.a);
  const auto b = static_cast<float>(options.curve.b);
  const auto dim = static_cast<Eigen::Index>(options.out_dim);
  auto& y = layout.coords;
  Random rng(options.seed ^ 0x5eed5eed5eed5eedULL);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto alpha = static_cast<float>(options.learning_rate * (1.0 - static_cast<double>(epoch) / epochs));
    const auto now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < edges; ++e) {
      if (next_sample[e] > now) continue;
      const Eigen::Index j = head[e], k = tail[e];

      float dist_sq = (y.row(j) - y.row(k)).squaredNorm();
      float coeff = 0.0f;
      if (dist_sq > 0.0f) coeff = -2.0f * a * b * std::pow(dist_sq, b - 1.0f) / (a * std::pow(dist_sq, b) + 1.0f);
      for (Eigen::Index d = 0; d < dim; ++d) {
        const float grad = clip(coeff * (y(j, d) - y(k, d)));
        y(j, d) += grad * alpha;
        y(k, d) -= grad * alpha;
      }
      next_sample[e] += epochs_per_sample[e];

      const double due = neg_rate > 0 ? (now - next_negative[e]) / epochs_per_negative[e] : 0.0;
      const auto negatives = due > 0 ? static_cast<std::size_t>(due) : std::size_t{0};
      for (std::size_t s = 0; s < negatives; ++s) {
        const auto other = static_cast<Eigen::Index>(rng.index(n));
        dist_sq = (y.row(j) - y.row(other)).squaredNorm();
        if (dist_sq > 0.0f) {
          coeff = 2.0f * b / ((0.001f + dist_sq) * (a * std::pow(dist_sq, b) + 1.0f));
        } else if (other == j) {
          continue;
        } else {
          coeff = 0.0f;
        }
        for (Eigen::Index d = 0; d < dim; ++d) {
          const float grad = coeff > 0.0f ? clip(coeff * (y(j, d) - y(other, d))) : 4.0f;
          y(j, d) += grad * alpha;
        }
      }
      if (negatives > 0) next_negative[e] += static_cast<double>(negatives) * epochs_per_negative[e];
    }
#ifndef NDEBUG
    assert(y.allFinite() && "layout diverged");
#endif
  }
  return layout;
}

Layout reduce(const RowMatrixf& data, const UmapOptions& options) {
  const KnnGraph knn = knn_exact(data, options.n_neighbors, options.metric, options.workers);
  const FuzzyGraph graph = fuzzy_simplicial_set(knn);
  LayoutOptions layout;
  layout.out_dim = options.out_dim;
  layout.epochs = options.epochs;
  layout.seed = options.seed;
  layout.curve = fit_curve(options.min_dist, options.spread);
  layout.neg_samples = options.neg_samples;
  layout.learning_rate = options.learning_rate;
  return optimize_layout(graph, layout);
}

void save_layout(const Layout& layout, std::span<const std::string> ids, const std::filesystem::path& payload,
                 const std::filesystem::path& manifest) {
  io::write_f32(payload, layout.coords);
  nlohmann::json meta = {{"ids", std::vector<std::string>(ids.begin(), ids.end())},
                         {"n", layout.coords.rows()},
                         {"out_dim", layout.coords.cols()},
                         {"seed", layout.seed},
                         {"epochs", layout.epochs},
                         {"dtype", "float32le"}};
  io::write_file(manifest, meta.dump(2) + "\n");
}

Layout load_layout(const std::filesystem::path& payload, const std::filesystem::path& manifest,
                   std::span<const std::string> expected_ids) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest.string() + ": malformed layout manifest (" + e.what() + ")");
  }
  const auto ids = meta.at("ids").get<std::vector<std::string>>();
  if (!std::equal(ids.begin(), ids.end(), expected_ids.begin(), expected_ids.end()))
    throw DataError(manifest.string() + ": layout ids do not match the passages");
  Layout layout;
  layout.seed = meta.at("seed").get<std::uint64_t>();
  layout.epochs = meta.at("epochs").get<std::size_t>();
  layout.coords = io::read_f32(payload, ids.size(), meta.at("out_dim").get<std::size_t>());
  if (!layout.coords.allFinite()) throw DataError(payload.string() + ": non-finite layout coordinate");
  return layout;
}

}  // namespace qforge::umap
