#include "qforge/topics.hpp"

#include "qforge/io.hpp"
#include "qforge/normalize.hpp"

#include <json.hpp>

#include <set>

namespace qforge::topics {

using nlohmann::json;

Stopwords load_stopwords(std::span<const std::filesystem::path> files) {
  Stopwords words;
  for (const auto& f : files) {
    for (auto line : io::read_lines(f)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      for (const auto& t : normalize::tokenize(line)) words.insert(t);
    }
  }
  return words;
}

std::vector<std::string> topic_tokens(std::string_view text, const Stopwords* stopwords, std::size_t min_length) {
  std::vector<std::string> out;
  for (auto& t : normalize::tokenize(text)) {
    if (normalize::is_punctuation_token(t) || t.size() < min_length) continue;
    if (stopwords && stopwords->contains(t)) continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::optional<Eigen::Index> ClassTerms::word_index(std::string_view word) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), word);
  if (it == vocabulary.end() || *it != word) return std::nullopt;
  return static_cast<Eigen::Index>(it - vocabulary.begin());
}

ClassTerms class_terms(std::span<const std::vector<std::string>> class_documents) {
  std::set<std::string> vocab;
  for (const auto& doc : class_documents) vocab.insert(doc.begin(), doc.end());
  ClassTerms terms;
  terms.vocabulary.assign(vocab.begin(), vocab.end());
  terms.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(class_documents.size()),
                                       static_cast<Eigen::Index>(terms.vocabulary.size()));
  for (std::size_t c = 0; c < class_documents.size(); ++c)
    for (const auto& w : class_documents[c]) terms.counts(static_cast<Eigen::Index>(c), *terms.word_index(w)) += 1;
  return terms;
}

std::vector<WordScore> ranked_words(const ClassTerms& terms, const Eigen::MatrixXd& scores, Eigen::Index cls,
                                    std::size_t limit) {
  std::vector<WordScore> words;
  for (Eigen::Index w = 0; w < scores.cols(); ++w)
    if (scores(cls, w) > 0) words.push_back({terms.vocabulary[static_cast<std::size_t>(w)], scores(cls, w)});
  std::sort(words.begin(), words.end(), [](const WordScore& a, const WordScore& b) {
    return a.score > b.score || (a.score == b.score && a.word < b.word);
  });
  if (words.size() > limit) words.resize(limit);
  return words;
}

std::vector<std::size_t> mmr_select(std::span<const double> relevance, const Eigen::MatrixXd& similarity,
                                    std::span<const std::string> names, std::size_t k, double diversity) {
  const auto n = relevance.size();
  if (names.size() != n || static_cast<std::size_t>(similarity.rows()) != n ||
      static_cast<std::size_t>(similarity.cols()) != n)
    throw Error("mmr: relevance, names and similarity sizes disagree");
  auto better_tie = [&](std::size_t a, std::size_t b) {
    return relevance[a] > relevance[b] || (relevance[a] == relevance[b] && names[a] < names[b]);
  };

  std::vector<std::size_t> picked;
  std::vector<bool> used(n, false);
  while (picked.size() < std::min(k, n)) {
    std::size_t best = n;
    double best_value = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      double value = relevance[i];
      if (!picked.empty()) {
        double max_sim = -std::numeric_limits<double>::infinity();
        for (auto p : picked) max_sim = std::max(max_sim, similarity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)));
        value = (1.0 - diversity) * relevance[i] - diversity * max_sim;
      }
      if (best == n || value > best_value || (value == best_value && better_tie(i, best))) {
        best = i;
        best_value = value;
      }
    }
    used[best] = true;
    picked.push_back(best);
  }
  return picked;
}

std::vector<std::string> mmr_keywords(std::span<const WordScore> candidates, const WordEmbedder& embed, std::size_t k,
                                      double diversity) {
  if (candidates.empty()) return {};
  const auto n = candidates.size();
  double top = 0;
  for (const auto& c : candidates) top = std::max(top, c.score);
  std::vector<double> relevance(n);
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) {
    relevance[i] = top > 0 ? candidates[i].score / top : 0.0;
    names[i] = candidates[i].word;
  }

  Eigen::MatrixXd vectors;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd v = embed(names[i]).cast<double>();
    if (i == 0) vectors.resize(static_cast<Eigen::Index>(n), v.size());
    const double norm = v.norm();
    if (norm > 0) v /= norm;
    vectors.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  const Eigen::MatrixXd similarity = vectors * vectors.transpose();

  std::vector<std::string> out;
  for (auto i : mmr_select(relevance, similarity, names, k, diversity)) out.push_back(names[i]);
  return out;
}

std::string topic_name(std::span<const std::string> keywords) {
  std::string name;
  for (const auto& k : keywords) {
    if (!name.empty()) name += '_';
    name += k;
  }
  return name;
}

double TopicModel::noise_percentage() const {
  return total ? 100.0 * static_cast<double>(noise) / static_cast<double>(total) : 0.0;
}

std::vector<std::vector<std::string>> class_documents(std::span<const std::vector<std::string>> documents,
                                                      std::span<const int> labels, std::size_t n_clusters) {
  if (documents.size() != labels.size()) throw Error("class_documents: label count does not match document count");
  std::vector<std::vector<std::string>> classes(n_clusters);
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (labels[i] < 0) continue;
    auto& cls = classes.at(static_cast<std::size_t>(labels[i]));
    cls.insert(cls.end(), documents[i].begin(), documents[i].end());
  }
  return classes;
}

TopicModel build_topics(std::span<const std::vector<std::string>> documents, std::span<const int> labels,
                        const WordEmbedder& embed, const TopicOptions& options) {
  std::size_t n_clusters = 0;
  for (int l : labels) n_clusters = std::max(n_clusters, static_cast<std::size_t>(l + 1));
  if (n_clusters == 0) throw DataError("topics: no clusters to describe");

  TopicModel model;
  model.total = labels.size();
  model.terms = class_terms(class_documents(documents, labels, n_clusters));
  model.scores = ctfidf_scores(model.terms.counts);

  model.topics.resize(n_clusters);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0)
      ++model.noise;
    else
      ++model.topics[static_cast<std::size_t>(labels[i])].size;
  }
  for (std::size_t c = 0; c < n_clusters; ++c) {
    auto& t = model.topics[c];
    const auto row = static_cast<Eigen::Index>(c);
    t.id = static_cast<int>(c);
    t.percentage = 100.0 * static_cast<double>(t.size) / static_cast<double>(model.total);
    t.top_words = ranked_words(model.terms, model.scores, row, options.top_words);
    const auto pool = ranked_words(model.terms, model.scores, row, options.candidates);
    t.keywords = mmr_keywords(pool, embed, options.keywords, options.diversity);
    t.name = t.keywords.empty() ? "topic_" + std::to_string(c) : topic_name(t.keywords);
  }
  return model;
}

GroupMap parse_group_map(std::string_view content, std::size_t n_topics) {
  GroupMap groups;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string line(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("group map line " + std::to_string(line_no) + ": expected topic_id<TAB>group");
    const auto id_text = line.substr(0, tab);
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(id_text, &used);
      if (used != id_text.size()) throw std::invalid_argument(id_text);
    } catch (const std::logic_error&) {
      throw DataError("group map line " + std::to_string(line_no) + ": bad topic id '" + id_text + "'");
    }
    if (id < 0 || static_cast<std::size_t>(id) >= n_topics)
      throw DataError("group map line " + std::to_string(line_no) + ": unknown topic id " + std::to_string(id));
    if (!groups.emplace(id, line.substr(tab + 1)).second)
      throw DataError("group map line " + std::to_string(line_no) + ": topic " + std::to_string(id) + " mapped twice");
  }
  return groups;
}

GroupMap load_group_map(const std::filesystem::path& path, std::size_t n_topics) {
  try {
    return parse_group_map(io::read_file(path), n_topics);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<TopicRow> topic_table(const TopicModel& model, const GroupMap* groups) {
  std::vector<TopicRow> rows;
  for (const auto& t : model.topics) {
    TopicRow r{t.id, t.name, t.size, t.percentage, {}};
    if (groups) {
      auto it = groups->find(t.id);
      r.group = it == groups->end() ? kUngrouped : it->second;
    }
    rows.push_back(std::move(r));
  }
  rows.push_back({-1, "noise", model.noise, model.noise_percentage(), {}});
  return rows;
}

std::vector<GroupRow> group_table(const TopicModel& model, const GroupMap& groups) {
  std::map<std::string, GroupRow> by_name;
  std::size_t clustered = 0;
  for (const auto& t : model.topics) {
    auto it = groups.find(t.id);
    const std::string name = it == groups.end() ? kUngrouped : it->second;
    auto& g = by_name[name];
    g.group = name;
    ++g.topics;
    g.size += t.size;
    clustered += t.size;
  }
  std::vector<GroupRow> rows;
  for (auto& [name, g] : by_name) {
    g.percentage = clustered ? 100.0 * static_cast<double>(g.size) / static_cast<double>(clustered) : 0.0;
    rows.push_back(g);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const GroupRow& a, const GroupRow& b) { return a.size > b.size; });
  return rows;
}

std::string topic_table_csv(std::span<const TopicRow> rows) {
  std::string out = "topic_id,name,size,percentage,group\n";
  for (const auto& r : rows)
    out += io::csv_row({std::to_string(r.id), r.name, std::to_string(r.size), io::format_fixed(r.percentage, 4), r.group});
  return out;
}

std::string topic_table_json(std::span<const TopicRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row = {{"topic_id", r.id}, {"name", r.name}, {"size", r.size}, {"percentage", r.percentage}};
    if (!r.group.empty()) row["group"] = r.group;
    arr.push_back(row);
  }
  return arr.dump(2) + "\n";
}

std::string group_table_csv(std::span<const GroupRow> rows) {
  std::string out = "group,topics,size,percentage\n";
  for (const auto& r : rows)
    out += io::csv_row({r.group, std::to_string(r.topics), std::to_string(r.size), io::format_fixed(r.percentage, 4)});
  return out;
}

std::string group_table_json(std::span<const GroupRow> rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"group", r.group}, {"topics", r.topics}, {"size", r.size}, {"percentage", r.percentage}});
  return arr.dump(2) + "\n";
}

std::string topics_json(const TopicModel& model) {
  json arr = json::array();
  for (const auto& t : model.topics) {
    json words = json::array();
    for (const auto& w : t.top_words) words.push_back({{"word", w.word}, {"score", w.score}});
    arr.push_back({{"topic_id", t.id},
                   {"name", t.name},
                   {"keywords", t.keywords},
                   {"size", t.size},
                   {"percentage", t.percentage},
                   {"top_words", words}});
  }
  return json{{"total", model.total}, {"noise", model.noise}, {"topics", arr}}.dump(2) + "\n";
}

}  // namespace qforge::topics
