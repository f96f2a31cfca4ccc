#pragma once

#include "qforge/post.hpp"

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace qforge::ingest {

// Parses one post per line. Blank lines are skipped; unknown fields are
// ignored. Throws DataError naming the line number or the duplicate id.
std::vector<RawPost> parse_posts(std::istream& in);
std::vector<RawPost> load_posts(const std::filesystem::path& path);
void write_posts(const std::filesystem::path& path, std::span<const RawPost> posts);

// Keeps posts whose trimmed selftext is nonempty and is not an API sentinel.
std::vector<RawPost> filter_text_posts(std::span<const RawPost> posts);
bool is_text_post(const RawPost& post);

struct SubredditStats {
  std::string subreddit;
  std::size_t posts = 0;
  double mean_chars = 0;
  double mean_tokens = 0;
  double mean_sentences = 0;
  double mean_qmarks = 0;
};

struct MacroStats {
  std::vector<SubredditStats> per_subreddit;  // sorted by subreddit name
  SubredditStats corpus;                      // subreddit == kCorpusRow
};

inline constexpr const char* kCorpusRow = "(all)";

// Characters are UTF-8 code points of the raw selftext; '?' marks are
// counted in the raw selftext as well.
MacroStats corpus_stats(std::span<const CleanPost> posts);
std::string macro_stats_csv(const MacroStats& stats);

std::size_t utf8_length(std::string_view text);

}  // namespace qforge::ingest
