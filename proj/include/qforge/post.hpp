#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qforge {

// A forum submission as delivered by a Pushshift-style dump.
struct RawPost {
  std::string id;
  std::string subreddit;
  std::string title;
  std::string selftext;
  std::int64_t created_utc = 0;
};

// A submission after normalization. Sentences joined by single spaces
// reproduce text_norm; tokens are lowercase.
struct CleanPost {
  std::string id;
  std::string subreddit;
  std::string title_norm;
  std::string text_norm;
  std::vector<std::string> sentences;
  std::vector<std::string> tokens;
  std::string raw_text;  // selftext before normalization, kept for corpus statistics
};

}  // namespace qforge
