#include "qforge/coherence.hpp"

#include "qforge/hdbscan.hpp"
#include "qforge/io.hpp"

#include <json.hpp>

#include <cmath>
#include <iostream>

namespace qforge::coherence {

using nlohmann::json;

DocumentIncidence::DocumentIncidence(std::span<const std::vector<std::string>> documents)
    : documents_(documents.size()) {
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (const auto& w : documents[d]) {
      auto& list = postings_[w];
      if (list.empty() || list.back() != d) list.push_back(static_cast<std::uint32_t>(d));
    }
  }
}

std::size_t DocumentIncidence::count(const std::string& word) const {
  auto it = postings_.find(word);
  return it == postings_.end() ? 0 : it->second.size();
}

std::size_t DocumentIncidence::count(const std::string& a, const std::string& b) const {
  auto ia = postings_.find(a);
  auto ib = postings_.find(b);
  if (ia == postings_.end() || ib == postings_.end()) return 0;
  const auto& x = ia->second;
  const auto& y = ib->second;
  std::size_t both = 0;
  for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
    if (x[i] < y[j])
      ++i;
    else if (y[j] < x[i])
      ++j;
    else {
      ++both;
      ++i;
      ++j;
    }
  }
  return both;
}

std::optional<double> umass(std::span<const std::string> words, const DocumentIncidence& incidence) {
  std::vector<const std::string*> kept;
  for (const auto& w : words)
    if (incidence.count(w) > 0) kept.push_back(&w);
  const auto n = kept.size();
  if (n < 2) return std::nullopt;
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      sum += std::log((static_cast<double>(incidence.count(*kept[i], *kept[j])) + 1.0) /
                      static_cast<double>(incidence.count(*kept[j])));
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

CoherenceReport topic_coherence(const topics::TopicModel& model, const DocumentIncidence& incidence,
                                std::size_t top_n) {
  CoherenceReport report;
  report.top_n = top_n;
  double sum = 0;
  std::size_t scored = 0;
  for (const auto& t : model.topics) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < std::min(top_n, t.top_words.size()); ++i) words.push_back(t.top_words[i].word);
    auto value = umass(words, incidence);
    if (value) {
      sum += *value;
      ++scored;
    } else {
      std::cerr << "warning: topic " << t.id << " has fewer than 2 scorable words; excluded from coherence\n";
    }
    report.per_topic.push_back(value);
  }
  if (scored) report.mean = sum / static_cast<double>(scored);
  return report;
}

std::optional<std::size_t> SweepResult::selected_size() const {
  if (!selected) return std::nullopt;
  return rows[*selected].min_cluster_size;
}

std::optional<std::size_t> select_best(std::span<const SweepRow> rows) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].mean_umass) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = rows[*best];
    const double v = *rows[i].mean_umass;
    if (v > *b.mean_umass || (v == *b.mean_umass && rows[i].min_cluster_size < b.min_cluster_size)) best = i;
  }
  return best;
}

DocumentIncidence labeled_incidence(std::span<const std::vector<std::string>> documents, std::span<const int> labels,
                                    bool include_noise) {
  if (include_noise) return DocumentIncidence(documents);
  std::vector<std::vector<std::string>> kept;
  for (std::size_t i = 0; i < documents.size(); ++i)
    if (labels[i] >= 0) kept.push_back(documents[i]);
  return DocumentIncidence(kept);
}

SweepResult sweep(const RowMatrixd& layout, std::span<const std::vector<std::string>> documents,
                  const SweepOptions& options) {
  if (options.sizes.empty()) throw ConfigError("sweep: empty size list");
  const auto n = static_cast<std::size_t>(layout.rows());
  if (documents.size() != n) throw Error("sweep: document count does not match the layout");

  SweepResult result;
  result.rows.resize(options.sizes.size());
  // Topic words only; MMR names are not needed for coherence.
  const topics::WordEmbedder no_vectors = [](const std::string&) { return Eigen::VectorXf::Ones(1); };
  topics::TopicOptions topic_options;
  topic_options.keywords = 0;
  topic_options.top_words = options.top_n;
  const DocumentIncidence all_documents(documents);

  parallel_for(options.sizes.size(), options.workers, [&](std::size_t s) {
    const auto size = options.sizes[s];
    auto& row = result.rows[s];
    row.min_cluster_size = size;
    const auto min_samples = options.min_samples ? options.min_samples : size;
    if (size < 2) throw ConfigError("sweep: min_cluster_size must be at least 2");
    if (size > n || min_samples >= n) return;
    const auto clusters = hdbscan::cluster(layout, size, min_samples, 1);
    row.n_clusters = clusters.labels.n_clusters();
    if (row.n_clusters == 0) return;
    const auto model = topics::build_topics(documents, clusters.labels.labels, no_vectors, topic_options);
    const auto incidence = options.include_noise
                               ? DocumentIncidence()
                               : labeled_incidence(documents, clusters.labels.labels, false);
    const auto& counts = options.include_noise ? all_documents : incidence;
    double sum = 0;
    std::size_t scored = 0;
    for (const auto& t : model.topics) {
      std::vector<std::string> words;
      for (const auto& w : t.top_words) words.push_back(w.word);
      if (auto v = umass(words, counts)) {
        sum += *v;
        ++scored;
      }
    }
    if (scored) row.mean_umass = sum / static_cast<double>(scored);
  });
  result.selected = select_best(result.rows);
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "min_cluster_size,n_clusters,mean_umass\n";
  for (const auto& r : result.rows)
    out += io::csv_row({std::to_string(r.min_cluster_size), std::to_string(r.n_clusters),
                        r.mean_umass ? io::format_double(*r.mean_umass) : std::string()});
  return out;
}

std::string sweep_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"min_cluster_size", r.min_cluster_size},
                    {"n_clusters", r.n_clusters},
                    {"mean_umass", r.mean_umass ? json(*r.mean_umass) : json(nullptr)}});
  json out = {{"rows", rows}};
  if (result.selected) {
    out["selected_min_cluster_size"] = result.rows[*result.selected].min_cluster_size;
    out["selected_n_clusters"] = result.rows[*result.selected].n_clusters;
  } else {
    out["selected_min_cluster_size"] = nullptr;
    out["selected_n_clusters"] = nullptr;
  }
  return out.dump(2) + "\n";
}

}  // namespace qforge::coherence
