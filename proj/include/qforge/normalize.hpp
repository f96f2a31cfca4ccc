#pragma once

#include "qforge/post.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qforge::normalize {

using Tokens = std::vector<std::string>;
using TokenCounts = std::map<std::string, std::size_t>;

// Lowercases, splits on whitespace and peels leading/trailing punctuation
// into single-character tokens. Intra-word apostrophes, hyphens and periods
// stay attached; '?' and '!' always become their own tokens. Curly
// apostrophes are folded to '\''.
Tokens tokenize(std::string_view text);
std::string detokenize(std::span<const std::string> tokens);

bool is_punctuation_token(std::string_view token);
bool is_terminator_token(std::string_view token);

// Removes URLs, e-mail addresses and (optionally) personal pronouns at the
// whitespace-token level. Surviving chunks are joined by single spaces.
std::string strip_entities(std::string_view text, bool drop_pronouns);
const std::vector<std::string>& personal_pronouns();

// token -> expansion tokens, loaded from a token<TAB>expansion file.
class Lexicon {
 public:
  Lexicon() = default;
  static Lexicon load_tsv(const std::filesystem::path& path);
  static Lexicon parse_tsv(std::string_view content, const std::string& origin = "lexicon");

  void add(std::string key, std::string_view expansion);
  const Tokens* find(std::string_view token) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Tokens, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, Tokens, std::less<>> entries_;
};

// Apostrophe forms are expanded in a first pass, apostrophe-less forms in a
// second. Unknown tokens pass through.
Tokens expand_contractions(std::span<const std::string> tokens, const Lexicon& contractions);
Tokens expand_abbreviations(std::span<const std::string> tokens, const Lexicon& abbreviations);

enum class Provenance { contraction, abbreviation, spelling };
std::string to_string(Provenance p);

struct Correction {
  std::string replacement;
  Provenance provenance = Provenance::spelling;
};

class CorrectionTable {
 public:
  void add(std::string token, Correction correction);
  const Correction* find(std::string_view token) const;
  Tokens apply(std::span<const std::string> tokens) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, Correction, std::less<>>& entries() const { return entries_; }

  // Audit table: token<TAB>replacement<TAB>provenance.
  std::string to_tsv() const;
  static CorrectionTable from_tsv(std::string_view content);
  // Folds the contraction and abbreviation lexicons in for auditing.
  void add_lexicon(const Lexicon& lexicon, Provenance provenance);

 private:
  std::map<std::string, Correction, std::less<>> entries_;
};

struct SpellingOptions {
  // nullopt: 1 for tokens of length <= short_token_length, 2 otherwise.
  std::optional<std::size_t> max_edit_distance;
  std::size_t short_token_length = 7;
  double min_freq_ratio = 10.0;
  std::size_t min_candidate_count = 5;
  // Only purely alphabetic tokens of at least this length are corrected.
  std::size_t min_token_length = 3;

  std::size_t edit_budget(std::size_t token_length) const;
};

std::size_t edit_distance(std::string_view a, std::string_view b);

// A token t maps to c iff count(t) < min_candidate_count,
// edit_distance(t, c) <= budget, count(c) >= min_freq_ratio * count(t) and c
// has the highest count among qualifying candidates (ties: lexicographically
// smallest). Chains are collapsed to their final target.
CorrectionTable build_spelling_table(const TokenCounts& counts, const SpellingOptions& options = {});

// Splits after runs of '.', '!' or '?' that are followed by whitespace or the
// end of text. A lone '.' after a known abbreviation does not split.
std::vector<std::string> segment_sentences(std::string_view text);
bool is_sentence_abbreviation(std::string_view word);

struct Lexicons {
  Lexicon contractions;
  Lexicon abbreviations;

  static Lexicons load(const std::filesystem::path& resource_dir);
};

struct NormalizeOptions {
  bool drop_pronouns = false;
  // Appends "." to a body whose last token is not a sentence terminator.
  bool terminate_text = true;
};

// strip_entities -> tokenize -> contractions -> abbreviations (no spelling).
Tokens pre_spelling_tokens(std::string_view text, const Lexicons& lexicons, const NormalizeOptions& options);

// Token counts over titles and bodies after contraction/abbreviation
// expansion; the input of build_spelling_table.
TokenCounts count_corpus_tokens(std::span<const RawPost> posts, const Lexicons& lexicons,
                                const NormalizeOptions& options);

std::string normalize_text(std::string_view text, const CorrectionTable& table, const Lexicons& lexicons,
                           const NormalizeOptions& options, bool terminate);

CleanPost normalize_post(const RawPost& raw, const CorrectionTable& table, const Lexicons& lexicons,
                         const NormalizeOptions& options = {});

// One JSON object per post with every CleanPost field.
std::string clean_posts_jsonl(std::span<const CleanPost> posts);
std::vector<CleanPost> clean_posts_from_jsonl(std::string_view content);

}  // namespace qforge::normalize
