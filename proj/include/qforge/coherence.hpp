#pragma once

#include "qforge/common.hpp"
#include "qforge/topics.hpp"

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qforge::coherence {

// Which documents contain each word.
class DocumentIncidence {
 public:
  DocumentIncidence() = default;
  explicit DocumentIncidence(std::span<const std::vector<std::string>> documents);

  std::size_t documents() const { return documents_; }
  std::size_t count(const std::string& word) const;
  std::size_t count(const std::string& a, const std::string& b) const;

 private:
  std::size_t documents_ = 0;
  std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;  // ascending document ids
};

// (2 / (N (N - 1))) * sum_{i<j} log((D(w_i, w_j) + 1) / D(w_j)) over the
// words in ranked order, N counted after dropping words with D = 0.
// nullopt when fewer than 2 words remain.
std::optional<double> umass(std::span<const std::string> words, const DocumentIncidence& incidence);

struct CoherenceReport {
  std::vector<std::optional<double>> per_topic;
  std::optional<double> mean;  // over topics with a value
  std::size_t top_n = 0;
};

CoherenceReport topic_coherence(const topics::TopicModel& model, const DocumentIncidence& incidence,
                                std::size_t top_n = 10);

struct SweepRow {
  std::size_t min_cluster_size = 0;
  std::size_t n_clusters = 0;
  std::optional<double> mean_umass;  // undefined when no cluster has a value
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> selected;  // index into rows

  std::optional<std::size_t> selected_size() const;
};

// Argmax of mean UMass over defined rows; ties go to the smaller size.
std::optional<std::size_t> select_best(std::span<const SweepRow> rows);

struct SweepOptions {
  std::vector<std::size_t> sizes{3, 5, 7, 9, 12, 15, 20, 25, 30, 50, 100, 150, 200, 220, 240, 250, 260, 500, 600};
  std::size_t min_samples = 0;  // 0: same as the size being tried
  std::size_t top_n = 10;
  bool include_noise = true;  // noise passages count as co-occurrence documents
  std::size_t workers = 1;
};

// Co-occurrence documents for a labeling: all documents, or only the
// clustered ones.
DocumentIncidence labeled_incidence(std::span<const std::vector<std::string>> documents, std::span<const int> labels,
                                    bool include_noise);

// Clusters the fixed layout once per size and scores the resulting topics.
// documents are the stopworded passage tokens used for c-TF-IDF.
SweepResult sweep(const RowMatrixd& layout, std::span<const std::vector<std::string>> documents,
                  const SweepOptions& options);

std::string sweep_csv(const SweepResult& result);
std::string sweep_json(const SweepResult& result);

}  // namespace qforge::coherence
