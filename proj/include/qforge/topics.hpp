#pragma once

#include "qforge/common.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace qforge::topics {

using Stopwords = std::unordered_set<std::string>;

// One word per line; '#' starts a comment. Several files may be merged.
Stopwords load_stopwords(std::span<const std::filesystem::path> files);

// Lowercased word tokens of a passage, punctuation dropped, tokens shorter
// than min_length dropped, stopwords dropped when given.
std::vector<std::string> topic_tokens(std::string_view text, const Stopwords* stopwords, std::size_t min_length = 2);

// Per-class term counts over a sorted vocabulary.
struct ClassTerms {
  std::vector<std::string> vocabulary;
  Eigen::MatrixXd counts;  // classes x words

  std::optional<Eigen::Index> word_index(std::string_view word) const;
};

ClassTerms class_terms(std::span<const std::vector<std::string>> class_documents);

// score(w, c) = tf(w, c) / sum_w tf(w, c) * log(1 + A / tf(w)), A the mean
// token count per class. Throws DataError on an empty vocabulary.
template <typename Derived>
Eigen::MatrixXd ctfidf_scores(const Eigen::MatrixBase<Derived>& counts) {
  if (counts.cols() == 0 || counts.rows() == 0) throw DataError("c-TF-IDF: empty vocabulary");
  const Eigen::ArrayXXd tf = counts.template cast<double>().array();
  const Eigen::ArrayXd class_totals = tf.rowwise().sum();
  const Eigen::Array<double, 1, Eigen::Dynamic> word_totals = tf.colwise().sum();
  const double mean_tokens = class_totals.sum() / static_cast<double>(tf.rows());
  const Eigen::Array<double, 1, Eigen::Dynamic> idf = (1.0 + mean_tokens / word_totals).log();
  const Eigen::ArrayXd inv_totals = (class_totals > 0).select(class_totals.inverse(), 0.0);
  return (tf.colwise() * inv_totals).rowwise() * idf;
}

struct WordScore {
  std::string word;
  double score = 0;
};

// Words with positive score in descending score order, ties lexicographic.
std::vector<WordScore> ranked_words(const ClassTerms& terms, const Eigen::MatrixXd& scores, Eigen::Index cls,
                                    std::size_t limit);

// Greedy MMR over candidates: first pick is the most relevant; each next pick
// maximizes (1 - diversity) * relevance - diversity * max similarity to the
// picks so far. Ties prefer higher relevance, then the smaller name.
// similarity is candidates x candidates.
std::vector<std::size_t> mmr_select(std::span<const double> relevance, const Eigen::MatrixXd& similarity,
                                    std::span<const std::string> names, std::size_t k, double diversity);

using WordEmbedder = std::function<Eigen::VectorXf(const std::string&)>;

// Relevance is the candidate score divided by the best candidate score;
// similarity is cosine between word vectors.
std::vector<std::string> mmr_keywords(std::span<const WordScore> candidates, const WordEmbedder& embed,
                                      std::size_t k = 4, double diversity = 0.3);

std::string topic_name(std::span<const std::string> keywords);

struct TopicOptions {
  std::size_t keywords = 4;
  double diversity = 0.3;
  std::size_t candidates = 10;  // MMR pool: top words by c-TF-IDF
  std::size_t top_words = 10;   // kept per topic for coherence
};

struct Topic {
  int id = 0;
  std::size_t size = 0;
  double percentage = 0;  // of all posts, noise included
  std::vector<std::string> keywords;
  std::string name;
  std::vector<WordScore> top_words;
};

struct TopicModel {
  std::vector<Topic> topics;  // topics[i].id == i
  std::size_t total = 0;
  std::size_t noise = 0;
  ClassTerms terms;
  Eigen::MatrixXd scores;

  double noise_percentage() const;
};

// Groups per-document tokens by label (noise excluded) into class documents.
std::vector<std::vector<std::string>> class_documents(std::span<const std::vector<std::string>> documents,
                                                      std::span<const int> labels, std::size_t n_clusters);

TopicModel build_topics(std::span<const std::vector<std::string>> documents, std::span<const int> labels,
                        const WordEmbedder& embed, const TopicOptions& options = {});

// Members of every cluster by ascending euclidean distance to the cluster
// centroid in the given space; ties by index.
struct Representative {
  std::size_t index = 0;
  double distance = 0;
};

template <typename Derived>
std::vector<std::vector<Representative>> representatives(const Eigen::MatrixBase<Derived>& points,
                                                         std::span<const int> labels, std::size_t n_clusters,
                                                         std::size_t per_cluster = 100) {
  if (static_cast<std::size_t>(points.rows()) != labels.size())
    throw Error("representatives: label count does not match the point count");
  const Eigen::MatrixXd x = points.template cast<double>();
  std::vector<std::vector<Eigen::Index>> members(n_clusters);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) members.at(static_cast<std::size_t>(labels[i])).push_back(static_cast<Eigen::Index>(i));

  std::vector<std::vector<Representative>> out(n_clusters);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    if (members[c].empty()) continue;
    const Eigen::MatrixXd rows = x(members[c], Eigen::all);
    const Eigen::RowVectorXd centroid = rows.colwise().mean();
    for (std::size_t m = 0; m < members[c].size(); ++m)
      out[c].push_back({static_cast<std::size_t>(members[c][m]),
                        (rows.row(static_cast<Eigen::Index>(m)) - centroid).norm()});
    std::sort(out[c].begin(), out[c].end(), [](const Representative& a, const Representative& b) {
      return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    });
    if (out[c].size() > per_cluster) out[c].resize(per_cluster);
  }
  return out;
}

// topic_id<TAB>group_name
using GroupMap = std::map<int, std::string>;
GroupMap parse_group_map(std::string_view content, std::size_t n_topics);
GroupMap load_group_map(const std::filesystem::path& path, std::size_t n_topics);

struct TopicRow {
  int id = 0;
  std::string name;
  std::size_t size = 0;
  double percentage = 0;
  std::string group;
};

struct GroupRow {
  std::string group;
  std::size_t topics = 0;
  std::size_t size = 0;
  double percentage = 0;  // of clustered posts
};

inline constexpr const char* kUngrouped = "(ungrouped)";

// One row per topic plus a trailing noise row (id -1).
std::vector<TopicRow> topic_table(const TopicModel& model, const GroupMap* groups);
std::vector<GroupRow> group_table(const TopicModel& model, const GroupMap& groups);

std::string topic_table_csv(std::span<const TopicRow> rows);
std::string topic_table_json(std::span<const TopicRow> rows);
std::string group_table_csv(std::span<const GroupRow> rows);
std::string group_table_json(std::span<const GroupRow> rows);
std::string topics_json(const TopicModel& model);

}  // namespace qforge::topics
