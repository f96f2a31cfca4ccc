#pragma once

#include "qforge/post.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qforge::summarize {

enum class SummaryKind { baseline, external };

struct Summary {
  std::string post_id;
  std::string text;
  SummaryKind kind = SummaryKind::baseline;
  std::vector<std::size_t> source_sentences;  // baseline only, strictly increasing
};

using SummaryMap = std::map<std::string, Summary, std::less<>>;

// For every question in order: up to two preceding sentences, then the
// question; sentences already emitted are skipped. Stops at the last sentence
// boundary within max_tokens, or hard-truncates when the first sentence
// alone is longer. Throws DataError when the post has no question.
Summary baseline_summary(const CleanPost& post, const std::vector<bool>& question_mask,
                         std::size_t max_tokens = 100);

// Sentence BLEU: geometric mean of clipped n-gram precisions for n = 1..max_n
// (add-one smoothing on zero matches for n >= 2) times the brevity penalty.
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
            std::size_t max_n = 4);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference,
               double beta = 1.0);
double rouge_1(std::span<const std::string> candidate, std::span<const std::string> reference);

enum class RougeVariant { l, one };
RougeVariant parse_rouge_variant(const std::string& name);

struct SummaryScore {
  std::string key;  // post id or subreddit
  std::size_t posts = 0;
  double bleu = 0;
  double rouge = 0;
};

// Per-subreddit mean of per-post scores of candidates against references.
// Every post needs both a candidate and a reference (DataError otherwise).
std::vector<SummaryScore> score_by_subreddit(std::span<const CleanPost> posts, const SummaryMap& candidates,
                                             const SummaryMap& references,
                                             RougeVariant variant = RougeVariant::l);
std::string scores_csv(std::span<const SummaryScore> scores);

// Sidecar rows {post_id, summary}; text is kept as delivered.
SummaryMap parse_external_summaries(std::string_view content);
SummaryMap load_external_summaries(const std::filesystem::path& path);

std::string summaries_jsonl(const SummaryMap& summaries);
SummaryMap summaries_from_jsonl(std::string_view content);

}  // namespace qforge::summarize
