#include "qforge/qdetect.hpp"

#include "qforge/common.hpp"
#include "qforge/io.hpp"
#include "qforge/normalize.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace qforge::qdetect {

using nlohmann::json;

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::rule: return "rule";
    case Engine::heuristic: return "heuristic";
    case Engine::external: return "external";
  }
  return "heuristic";
}

Engine parse_engine(const std::string& name) {
  if (name == "rule") return Engine::rule;
  if (name == "heuristic") return Engine::heuristic;
  if (name == "external") return Engine::external;
  throw ConfigError("unknown detection engine '" + name + "' (expected rule, heuristic or external)");
}

void LabelSet::add(SentenceLabel label) {
  auto& list = by_post_[label.post_id];
  auto pos = std::lower_bound(list.begin(), list.end(), label.index,
                              [](const SentenceLabel& l, std::size_t idx) { return l.index < idx; });
  if (pos != list.end() && pos->index == label.index)
    throw DataError("duplicate label for post '" + label.post_id + "' sentence " + std::to_string(label.index));
  list.insert(pos, std::move(label));
}

const std::vector<SentenceLabel>* LabelSet::find(std::string_view post_id) const {
  auto it = by_post_.find(post_id);
  return it == by_post_.end() ? nullptr : &it->second;
}

std::vector<bool> LabelSet::question_mask(const CleanPost& post) const {
  std::vector<bool> mask(post.sentences.size(), false);
  if (const auto* list = find(post.id))
    for (const auto& l : *list)
      if (l.index < mask.size()) mask[l.index] = l.is_question;
  return mask;
}

std::size_t LabelSet::size() const {
  std::size_t n = 0;
  for (const auto& [id, list] : by_post_) n += list.size();
  return n;
}

std::vector<SentenceLabel> LabelSet::rows() const {
  std::vector<SentenceLabel> out;
  for (const auto& [id, list] : by_post_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

std::string LabelSet::to_jsonl() const {
  std::string out;
  for (const auto& l : rows()) {
    json row = {{"post_id", l.post_id},
                {"sent_idx", l.index},
                {"is_question", l.is_question},
                {"source", to_string(l.source)},
                {"score", l.score}};
    out += row.dump() + "\n";
  }
  return out;
}

LabelSet LabelSet::from_jsonl(std::string_view content) {
  LabelSet set;
  std::size_t line_no = 0, pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json row = json::parse(line);
      set.add({row.at("post_id").get<std::string>(), row.at("sent_idx").get<std::size_t>(),
               row.at("is_question").get<bool>(), parse_engine(row.at("source").get<std::string>()),
               row.at("score").get<double>()});
    } catch (const json::exception& e) {
      throw DataError("labels line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

namespace {

std::vector<std::string> read_phrase_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (auto& line : io::read_lines(path)) {
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

bool ends_with_tokens(std::span<const std::string> tokens, std::span<const std::string> suffix) {
  if (suffix.size() > tokens.size()) return false;
  return std::equal(suffix.begin(), suffix.end(), tokens.end() - static_cast<std::ptrdiff_t>(suffix.size()));
}

bool contains_tokens(std::span<const std::string> tokens, std::span<const std::string> phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

bool is_closing_token(const std::string& t) { return t == "\"" || t == "'" || t == ")" || t == "]"; }

std::vector<std::string> trimmed_tokens(std::string_view sentence) {
  auto tokens = normalize::tokenize(sentence);
  while (!tokens.empty() && is_closing_token(tokens.back())) tokens.pop_back();
  return tokens;
}

}  // namespace

HeuristicRules HeuristicRules::load(const std::filesystem::path& resource_dir) {
  HeuristicRules rules;
  for (const auto& line : read_phrase_lines(resource_dir / "rhetorical.txt"))
    rules.rhetorical.push_back(normalize::tokenize(line));
  for (const auto& line : read_phrase_lines(resource_dir / "interrogative_leads.txt"))
    rules.leads.push_back(normalize::tokenize(line));
  for (const auto& line : read_phrase_lines(resource_dir / "lead_fillers.txt"))
    for (auto& t : normalize::tokenize(line)) rules.fillers.push_back(std::move(t));
  return rules;
}

bool is_rule_question(std::string_view sentence) {
  std::size_t end = sentence.size();
  while (end > 0) {
    const char c = sentence[end - 1];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'') {
      --end;
      continue;
    }
    // Closing curly quotes.
    if (end >= 3 && static_cast<unsigned char>(sentence[end - 3]) == 0xE2 &&
        static_cast<unsigned char>(sentence[end - 2]) == 0x80 &&
        (static_cast<unsigned char>(c) == 0x9D || static_cast<unsigned char>(c) == 0x99)) {
      end -= 3;
      continue;
    }
    break;
  }
  return end > 0 && sentence[end - 1] == '?';
}

bool is_rhetorical(std::string_view sentence, const HeuristicRules& rules) {
  const auto tokens = trimmed_tokens(sentence);
  for (const auto& pattern : rules.rhetorical) {
    if (pattern.empty()) continue;
    const bool anchored = pattern.back() == "?";
    if (anchored ? ends_with_tokens(tokens, pattern) : contains_tokens(tokens, pattern)) return true;
  }
  return false;
}

bool has_interrogative_lead(std::string_view sentence, const HeuristicRules& rules) {
  const auto tokens = trimmed_tokens(sentence);
  const std::unordered_set<std::string> fillers(rules.fillers.begin(), rules.fillers.end());
  std::size_t start = 0;
  while (start < tokens.size() && fillers.contains(tokens[start])) ++start;
  const std::span<const std::string> rest(tokens.data() + start, tokens.size() - start);
  for (const auto& lead : rules.leads) {
    if (lead.empty() || lead.size() > rest.size()) continue;
    if (!std::equal(lead.begin(), lead.end(), rest.begin())) continue;
    if (lead.size() == 1) {
      if (rest.size() < 2) continue;
      const auto& next = rest[1];
      if (next == "not" || next == "n't" || normalize::is_punctuation_token(next)) continue;
    }
    return true;
  }
  return false;
}

bool is_heuristic_question(std::string_view sentence, const HeuristicRules& rules) {
  if (is_rule_question(sentence) && !is_rhetorical(sentence, rules)) return true;
  return has_interrogative_lead(sentence, rules);
}

namespace {

template <typename Classifier>
LabelSet label_all(std::span<const CleanPost> posts, Engine engine, Classifier&& classify) {
  LabelSet set;
  for (const auto& p : posts)
    for (std::size_t i = 0; i < p.sentences.size(); ++i) {
      const bool q = classify(p.sentences[i]);
      set.add({p.id, i, q, engine, q ? 1.0 : 0.0});
    }
  return set;
}

}  // namespace

LabelSet detect_rule(std::span<const CleanPost> posts) {
  return label_all(posts, Engine::rule, [](std::string_view s) { return is_rule_question(s); });
}

LabelSet detect_heuristic(std::span<const CleanPost> posts, const HeuristicRules& rules) {
  return label_all(posts, Engine::heuristic,
                   [&](std::string_view s) { return is_heuristic_question(s, rules); });
}

LabelSet parse_external_scores(std::string_view content, std::span<const CleanPost> posts, double threshold) {
  std::unordered_map<std::string, std::size_t> sentence_counts;
  for (const auto& p : posts) sentence_counts[p.id] = p.sentences.size();

  LabelSet set;
  std::size_t line_no = 0, pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "scores line " + std::to_string(line_no) + ": ";
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!row.is_object() || !row.contains("post_id") || !row.contains("sent_idx") || !row.contains("score") ||
        !row["post_id"].is_string() || !row["sent_idx"].is_number_unsigned() || !row["score"].is_number())
      throw DataError(where + "expected {post_id, sent_idx, score}");
    const auto id = row["post_id"].get<std::string>();
    const auto idx = row["sent_idx"].get<std::size_t>();
    const auto score = row["score"].get<double>();
    auto it = sentence_counts.find(id);
    if (it == sentence_counts.end()) throw DataError(where + "unknown post id '" + id + "'");
    if (idx >= it->second)
      throw DataError(where + "sentence index " + std::to_string(idx) + " out of range for post '" + id + "'");
    if (!(score >= 0.0 && score <= 1.0))
      throw DataError(where + "score " + io::format_double(score) + " outside [0, 1]");
    try {
      set.add({id, idx, score >= threshold, Engine::external, score});
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  for (const auto& p : posts) {
    const auto* list = set.find(p.id);
    const std::size_t have = list ? list->size() : 0;
    if (have != p.sentences.size())
      throw DataError("scores: post '" + p.id + "' has " + std::to_string(have) + " of " +
                      std::to_string(p.sentences.size()) + " sentences scored");
  }
  return set;
}

LabelSet import_external_scores(const std::filesystem::path& path, std::span<const CleanPost> posts,
                                double threshold) {
  try {
    return parse_external_scores(io::read_file(path), posts, threshold);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

QuestionStats question_stats(const LabelSet& labels, std::span<const CleanPost> posts, std::size_t bins) {
  QuestionStats stats;
  stats.posts = posts.size();
  stats.histogram.assign(bins, 0.0);
  std::vector<std::size_t> bin_counts(bins, 0);
  std::size_t last3 = 0;
  for (const auto& p : posts) {
    const auto mask = labels.question_mask(p);
    const std::size_t n = mask.size();
    std::size_t count = 0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      ++count;
      last = i;
      // Integer arithmetic places i/n in bin floor(i * bins / n).
      ++bin_counts[std::min(bins - 1, i * bins / n)];
    }
    stats.per_post_counts.push_back(count);
    stats.question_sentences += count;
    if (count > 0) {
      ++stats.question_posts;
      if (last + 3 >= n) ++last3;
    }
  }
  if (stats.posts)
    stats.mean_questions_per_post = static_cast<double>(stats.question_sentences) / static_cast<double>(stats.posts);
  if (stats.question_sentences)
    for (std::size_t b = 0; b < bins; ++b)
      stats.histogram[b] = static_cast<double>(bin_counts[b]) / static_cast<double>(stats.question_sentences);
  if (stats.question_posts)
    stats.last3_fraction = static_cast<double>(last3) / static_cast<double>(stats.question_posts);
  return stats;
}

std::string question_stats_json(const QuestionStats& stats) {
  json out = {{"posts", stats.posts},
              {"question_posts", stats.question_posts},
              {"question_sentences", stats.question_sentences},
              {"mean_questions_per_post", stats.mean_questions_per_post},
              {"last3_fraction", stats.last3_fraction},
              {"histogram", stats.histogram}};
  return out.dump(2) + "\n";
}

std::string position_histogram_csv(const QuestionStats& stats) {
  std::string out = "bin_start,bin_end,fraction\n";
  const auto bins = stats.histogram.size();
  for (std::size_t b = 0; b < bins; ++b)
    out += io::csv_row({io::format_fixed(static_cast<double>(b) / static_cast<double>(bins), 2),
                        io::format_fixed(static_cast<double>(b + 1) / static_cast<double>(bins), 2),
                        io::format_fixed(stats.histogram[b], 6)});
  return out;
}

std::vector<CleanPost> filter_question_posts(std::span<const CleanPost> posts, const LabelSet& labels) {
  std::vector<CleanPost> kept;
  for (const auto& p : posts) {
    const auto mask = labels.question_mask(p);
    if (std::find(mask.begin(), mask.end(), true) != mask.end()) kept.push_back(p);
  }
  return kept;
}

std::vector<std::string> post_questions(const CleanPost& post, const LabelSet& labels) {
  const auto mask = labels.question_mask(post);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && seen.insert(post.sentences[i]).second) out.push_back(post.sentences[i]);
  return out;
}

}  // namespace qforge::qdetect
