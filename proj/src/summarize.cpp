#include "qforge/summarize.hpp"

#include "qforge/common.hpp"
#include "qforge/io.hpp"
#include "qforge/normalize.hpp"

#include <json.hpp>

#include <cmath>
#include <unordered_map>

namespace qforge::summarize {

using nlohmann::json;

Summary baseline_summary(const CleanPost& post, const std::vector<bool>& question_mask, std::size_t max_tokens) {
  std::vector<std::size_t> chosen;
  std::vector<bool> emitted(post.sentences.size(), false);
  for (std::size_t q = 0; q < post.sentences.size() && q < question_mask.size(); ++q) {
    if (!question_mask[q]) continue;
    for (std::size_t s = q >= 2 ? q - 2 : 0; s <= q; ++s) {
      if (emitted[s]) continue;
      emitted[s] = true;
      chosen.push_back(s);
    }
  }
  if (chosen.empty()) throw DataError("post '" + post.id + "' has no question to summarize");

  Summary summary;
  summary.post_id = post.id;
  summary.kind = SummaryKind::baseline;
  normalize::Tokens tokens;
  for (std::size_t s : chosen) {
    auto sentence_tokens = normalize::tokenize(post.sentences[s]);
    if (tokens.size() + sentence_tokens.size() > max_tokens) {
      if (summary.source_sentences.empty()) {
        sentence_tokens.resize(max_tokens);
        tokens = std::move(sentence_tokens);
        summary.source_sentences.push_back(s);
      }
      break;
    }
    tokens.insert(tokens.end(), sentence_tokens.begin(), sentence_tokens.end());
    summary.source_sentences.push_back(s);
  }
  summary.text = normalize::detokenize(tokens);
  return summary;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

}  // namespace

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t max_n) {
  if (candidate.empty() || reference.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = ngrams(candidate, n);
    const auto ref = ngrams(reference, n);
    std::size_t total = 0, matched = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    double precision;
    if (matched == 0) {
      if (n == 1) return 0.0;
      precision = 1.0 / static_cast<double>(total + 1);
    } else {
      precision = static_cast<double>(matched) / static_cast<double>(total);
    }
    log_sum += std::log(precision);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return brevity * std::exp(log_sum / static_cast<double>(max_n));
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

double f_measure(double precision, double recall, double beta) {
  if (precision <= 0.0 || recall <= 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * precision * recall / (recall + b2 * precision);
}

}  // namespace

double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference, double beta) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  return f_measure(lcs / static_cast<double>(candidate.size()), lcs / static_cast<double>(reference.size()), beta);
}

double rouge_1(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto cand = ngrams(candidate, 1);
  const auto ref = ngrams(reference, 1);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  const auto o = static_cast<double>(overlap);
  return f_measure(o / static_cast<double>(candidate.size()), o / static_cast<double>(reference.size()), 1.0);
}

RougeVariant parse_rouge_variant(const std::string& name) {
  if (name == "l" || name == "rouge-l") return RougeVariant::l;
  if (name == "1" || name == "rouge-1") return RougeVariant::one;
  throw ConfigError("unknown ROUGE variant '" + name + "' (expected l or 1)");
}

std::vector<SummaryScore> score_by_subreddit(std::span<const CleanPost> posts, const SummaryMap& candidates,
                                             const SummaryMap& references, RougeVariant variant) {
  std::map<std::string, SummaryScore> acc;
  for (const auto& p : posts) {
    auto c = candidates.find(p.id);
    auto r = references.find(p.id);
    if (c == candidates.end()) throw DataError("no candidate summary for post '" + p.id + "'");
    if (r == references.end()) throw DataError("no reference summary for post '" + p.id + "'");
    const auto ct = normalize::tokenize(c->second.text);
    const auto rt = normalize::tokenize(r->second.text);
    auto& s = acc[p.subreddit];
    s.key = p.subreddit;
    ++s.posts;
    s.bleu += bleu(ct, rt);
    s.rouge += variant == RougeVariant::l ? rouge_l(ct, rt) : rouge_1(ct, rt);
  }
  std::vector<SummaryScore> out;
  for (auto& [name, s] : acc) {
    s.bleu /= static_cast<double>(s.posts);
    s.rouge /= static_cast<double>(s.posts);
    out.push_back(s);
  }
  return out;
}

std::string scores_csv(std::span<const SummaryScore> scores) {
  std::string out = "subreddit,bleu,rouge\n";
  for (const auto& s : scores)
    out += io::csv_row({s.key, io::format_fixed(s.bleu, 4), io::format_fixed(s.rouge, 4)});
  return out;
}

SummaryMap parse_external_summaries(std::string_view content) {
  SummaryMap map;
  std::size_t line_no = 0, pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "summaries line " + std::to_string(line_no) + ": ";
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!row.is_object() || !row.contains("post_id") || !row.contains("summary") || !row["post_id"].is_string() ||
        !row["summary"].is_string())
      throw DataError(where + "expected {post_id, summary}");
    Summary s;
    s.post_id = row["post_id"].get<std::string>();
    s.text = row["summary"].get<std::string>();
    s.kind = SummaryKind::external;
    if (map.contains(s.post_id)) throw DataError(where + "duplicate post id '" + s.post_id + "'");
    map.emplace(s.post_id, std::move(s));
  }
  return map;
}

SummaryMap load_external_summaries(const std::filesystem::path& path) {
  try {
    return parse_external_summaries(io::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string summaries_jsonl(const SummaryMap& summaries) {
  std::string out;
  for (const auto& [id, s] : summaries) {
    json row = {{"post_id", id},
                {"summary", s.text},
                {"kind", s.kind == SummaryKind::baseline ? "baseline" : "external"},
                {"sources", s.source_sentences}};
    out += row.dump() + "\n";
  }
  return out;
}

SummaryMap summaries_from_jsonl(std::string_view content) {
  SummaryMap map;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    const json row = json::parse(line);
    Summary s;
    s.post_id = row.at("post_id").get<std::string>();
    s.text = row.at("summary").get<std::string>();
    s.kind = row.value("kind", "baseline") == "baseline" ? SummaryKind::baseline : SummaryKind::external;
    if (row.contains("sources")) s.source_sentences = row["sources"].get<std::vector<std::size_t>>();
    map.emplace(s.post_id, std::move(s));
  }
  return map;
}

}  // namespace qforge::summarize
