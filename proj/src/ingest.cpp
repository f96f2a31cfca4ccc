#include "qforge/ingest.hpp"

#include "qforge/common.hpp"
#include "qforge/io.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <unordered_set>

namespace qforge::ingest {

using nlohmann::json;

namespace {

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

std::string optional_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw DataError(line_error(line_no, std::string("field '") + key + "' is not a string"));
  return it->get<std::string>();
}

std::int64_t parse_created(const json& obj, std::size_t line_no) {
  auto it = obj.find("created_utc");
  if (it == obj.end() || it->is_null()) return 0;
  std::int64_t value = 0;
  if (it->is_number_integer()) {
    value = it->get<std::int64_t>();
  } else if (it->is_number_float()) {
    value = static_cast<std::int64_t>(it->get<double>());
  } else if (it->is_string()) {
    try {
      value = std::stoll(it->get<std::string>());
    } catch (const std::exception&) {
      throw DataError(line_error(line_no, "created_utc is not numeric"));
    }
  } else {
    throw DataError(line_error(line_no, "created_utc is not numeric"));
  }
  if (value < 0) throw DataError(line_error(line_no, "created_utc is negative"));
  return value;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<RawPost> parse_posts(std::istream& in) {
  std::vector<RawPost> posts;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(line_error(line_no, std::string("malformed JSON (") + e.what() + ")"));
    }
    if (!obj.is_object()) throw DataError(line_error(line_no, "not a JSON object"));
    for (const char* key : {"id", "subreddit"}) {
      auto it = obj.find(key);
      if (it == obj.end() || !it->is_string() || it->get<std::string>().empty())
        throw DataError(line_error(line_no, std::string("missing required field '") + key + "'"));
    }
    RawPost post;
    post.id = obj["id"].get<std::string>();
    post.subreddit = obj["subreddit"].get<std::string>();
    post.title = optional_string(obj, "title", line_no);
    post.selftext = optional_string(obj, "selftext", line_no);
    post.created_utc = parse_created(obj, line_no);
    if (!seen.insert(post.id).second)
      throw DataError(line_error(line_no, "duplicate post id '" + post.id + "'"));
    posts.push_back(std::move(post));
  }
  return posts;
}

std::vector<RawPost> load_posts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_posts(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_posts(const std::filesystem::path& path, std::span<const RawPost> posts) {
  std::string out;
  for (const auto& p : posts) {
    json row = {{"id", p.id},
                {"subreddit", p.subreddit},
                {"title", p.title},
                {"selftext", p.selftext},
                {"created_utc", p.created_utc}};
    out += row.dump() + "\n";
  }
  io::write_file(path, out);
}

bool is_text_post(const RawPost& post) {
  const auto body = trim(post.selftext);
  return !body.empty() && body != "[removed]" && body != "[deleted]";
}

std::vector<RawPost> filter_text_posts(std::span<const RawPost> posts) {
  std::vector<RawPost> kept;
  for (const auto& p : posts)
    if (is_text_post(p)) kept.push_back(p);
  return kept;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

namespace {

// Integer accumulators keep the means independent of summation order.
struct Totals {
  std::uint64_t posts = 0, chars = 0, tokens = 0, sentences = 0, qmarks = 0;

  void add(const CleanPost& p) {
    ++posts;
    chars += utf8_length(p.raw_text);
    tokens += p.tokens.size();
    sentences += p.sentences.size();
    qmarks += static_cast<std::uint64_t>(std::count(p.raw_text.begin(), p.raw_text.end(), '?'));
  }

  SubredditStats finish(std::string name) const {
    SubredditStats s;
    s.subreddit = std::move(name);
    s.posts = posts;
    if (posts == 0) return s;
    const auto n = static_cast<double>(posts);
    s.mean_chars = static_cast<double>(chars) / n;
    s.mean_tokens = static_cast<double>(tokens) / n;
    s.mean_sentences = static_cast<double>(sentences) / n;
    s.mean_qmarks = static_cast<double>(qmarks) / n;
    return s;
  }
};

}  // namespace

MacroStats corpus_stats(std::span<const CleanPost> posts) {
  std::map<std::string, Totals> by_subreddit;
  Totals all;
  for (const auto& p : posts) {
    by_subreddit[p.subreddit].add(p);
    all.add(p);
  }
  MacroStats stats;
  for (const auto& [name, totals] : by_subreddit) stats.per_subreddit.push_back(totals.finish(name));
  stats.corpus = all.finish(kCorpusRow);
  return stats;
}

std::string macro_stats_csv(const MacroStats& stats) {
  std::string out = "subreddit,posts,mean_chars,mean_tokens,mean_sentences,mean_qmarks\n";
  auto row = [&](const SubredditStats& s) {
    out += io::csv_row({s.subreddit, std::to_string(s.posts), io::format_fixed(s.mean_chars, 4),
                        io::format_fixed(s.mean_tokens, 4), io::format_fixed(s.mean_sentences, 4),
                        io::format_fixed(s.mean_qmarks, 4)});
  };
  for (const auto& s : stats.per_subreddit) row(s);
  row(stats.corpus);
  return out;
}

}  // namespace qforge::ingest
