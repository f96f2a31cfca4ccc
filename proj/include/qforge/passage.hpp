#pragma once

#include "qforge/common.hpp"
#include "qforge/post.hpp"
#include "qforge/qdetect.hpp"
#include "qforge/summarize.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qforge::passage {

struct Passage {
  std::string post_id;
  std::string text;
};

// title_norm + summary + question sentences, whitespace collapsed. Throws
// DataError naming the post when its summary is missing.
std::vector<Passage> build_passages(std::span<const CleanPost> posts, const summarize::SummaryMap& summaries,
                                    const qdetect::LabelSet& labels);
std::string passages_jsonl(std::span<const Passage> passages);
std::vector<Passage> passages_from_jsonl(std::string_view content);

struct EmbeddingMatrix {
  std::vector<std::string> ids;
  RowMatrixf values;
  Metric metric = Metric::cosine;
  std::string model;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

// embeddings.f32 holds n*d little-endian float32 values; the manifest carries
// {ids, n, d, model, metric}. Row i must correspond to expected_ids[i].
EmbeddingMatrix import_embeddings(const std::filesystem::path& payload, const std::filesystem::path& manifest,
                                  std::span<const std::string> expected_ids,
                                  std::optional<std::size_t> expected_dim = std::nullopt);
void export_embeddings(const EmbeddingMatrix& embeddings, const std::filesystem::path& payload,
                       const std::filesystem::path& manifest);

// Signed feature hashing of word tokens into d buckets followed by L2 row
// normalization. Non-semantic stand-in for a sentence encoder.
EmbeddingMatrix hash_embed(std::span<const Passage> passages, std::size_t dim, std::uint64_t seed);
Eigen::VectorXf hash_embed_text(std::string_view text, std::size_t dim, std::uint64_t seed);

// Scales every row to unit L2 norm; throws DataError on a zero row.
template <typename Derived>
void normalize_rows(Eigen::MatrixBase<Derived>& matrix) {
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const auto norm = matrix.row(i).norm();
    if (!(norm > 0)) throw DataError("zero or non-finite row " + std::to_string(i) + " cannot be normalized");
    matrix.row(i) /= norm;
  }
}

// 1 - cos(u, v), clamped to [0, 2]. Throws DataError on a zero vector.
template <typename DerivedA, typename DerivedB>
double cosine_distance(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  const double nu = static_cast<double>(u.norm());
  const double nv = static_cast<double>(v.norm());
  if (!(nu > 0) || !(nv > 0)) throw DataError("cosine distance of a zero vector");
  const double d = 1.0 - static_cast<double>(u.dot(v)) / (nu * nv);
  return std::clamp(d, 0.0, 2.0);
}

template <typename DerivedA, typename DerivedB>
double euclidean_distance(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  return static_cast<double>((u - v).norm());
}

}  // namespace qforge::passage
