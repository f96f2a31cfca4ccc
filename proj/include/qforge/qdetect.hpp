#pragma once

#include "qforge/post.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qforge::qdetect {

enum class Engine { rule, heuristic, external };
std::string to_string(Engine engine);
Engine parse_engine(const std::string& name);

struct SentenceLabel {
  std::string post_id;
  std::size_t index = 0;
  bool is_question = false;
  Engine source = Engine::heuristic;
  double score = 0.0;
};

// Labels for a whole corpus, grouped per post in sentence order.
class LabelSet {
 public:
  // Throws DataError on a duplicate (post id, index).
  void add(SentenceLabel label);
  const std::vector<SentenceLabel>* find(std::string_view post_id) const;
  std::vector<bool> question_mask(const CleanPost& post) const;
  std::size_t size() const;
  // All labels, posts in id order, sentences ascending.
  std::vector<SentenceLabel> rows() const;

  std::string to_jsonl() const;
  static LabelSet from_jsonl(std::string_view content);

 private:
  std::map<std::string, std::vector<SentenceLabel>, std::less<>> by_post_;
};

// Resource lists for the heuristic engine, one tokenized phrase per line.
struct HeuristicRules {
  std::vector<std::vector<std::string>> rhetorical;
  std::vector<std::vector<std::string>> leads;
  std::vector<std::string> fillers;

  static HeuristicRules load(const std::filesystem::path& resource_dir);
};

// Ends with '?' once trailing quotes and whitespace are ignored.
bool is_rule_question(std::string_view sentence);
bool is_rhetorical(std::string_view sentence, const HeuristicRules& rules);
bool has_interrogative_lead(std::string_view sentence, const HeuristicRules& rules);
bool is_heuristic_question(std::string_view sentence, const HeuristicRules& rules);

LabelSet detect_rule(std::span<const CleanPost> posts);
LabelSet detect_heuristic(std::span<const CleanPost> posts, const HeuristicRules& rules);

// Sidecar rows {post_id, sent_idx, score}. Every sentence of every post must
// be scored exactly once; is_question <=> score >= threshold.
LabelSet import_external_scores(const std::filesystem::path& path, std::span<const CleanPost> posts,
                                double threshold = 0.5);
LabelSet parse_external_scores(std::string_view content, std::span<const CleanPost> posts,
                               double threshold = 0.5);

struct QuestionStats {
  std::size_t posts = 0;
  std::size_t question_posts = 0;
  std::size_t question_sentences = 0;
  double mean_questions_per_post = 0;
  std::vector<std::size_t> per_post_counts;  // aligned with the input posts
  std::vector<double> histogram;             // mass per bin over relative position in [0, 1)
  double last3_fraction = 0;                 // over question-bearing posts
};

QuestionStats question_stats(const LabelSet& labels, std::span<const CleanPost> posts, std::size_t bins = 10);
std::string question_stats_json(const QuestionStats& stats);
std::string position_histogram_csv(const QuestionStats& stats);

std::vector<CleanPost> filter_question_posts(std::span<const CleanPost> posts, const LabelSet& labels);

// Question sentences in document order, deduplicated by exact string.
std::vector<std::string> post_questions(const CleanPost& post, const LabelSet& labels);

}  // namespace qforge::qdetect
