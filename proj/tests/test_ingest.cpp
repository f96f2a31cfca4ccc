#include "qforge/ingest.hpp"
#include "qforge/io.hpp"
#include "qforge/normalize.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <random>
#include <sstream>

using namespace qforge;

namespace {

std::vector<RawPost> parse(const std::string& text) {
  std::istringstream in(text);
  return ingest::parse_posts(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

std::vector<CleanPost> normalized(const std::vector<RawPost>& raw) {
  const auto lexicons = normalize::Lexicons::load(fixture::resource_dir());
  normalize::CorrectionTable empty;
  std::vector<CleanPost> out;
  for (const auto& p : raw) out.push_back(normalize::normalize_post(p, empty, lexicons));
  return out;
}

}  // namespace

TEST(Io, Fnv1aKnownVectors) {
  EXPECT_EQ(io::hex64(io::fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(io::hex64(io::fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(io::hex64(io::fnv1a64("foobar")), "85944171f73967e8");
}

TEST(Io, CsvQuoting) {
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(io::csv_row({"x", "1,2", ""}), "x,\"1,2\",\n");
}

TEST(Io, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_fixed(2.0 / 3.0, 4), "0.6667");
}

TEST(Io, F32PayloadRoundTripAndSizeChecks) {
  fixture::TempDir dir("io");
  RowMatrixf m = RowMatrixf::Random(7, 3);
  io::write_f32(dir / "m.f32", m);
  EXPECT_EQ(std::filesystem::file_size(dir / "m.f32"), 7u * 3u * 4u);
  EXPECT_EQ(io::read_f32(dir / "m.f32", 7, 3), m);
  EXPECT_THROW(io::read_f32(dir / "m.f32", 8, 3), DataError);
  EXPECT_THROW(io::read_f32(dir / "m.f32", 6, 3), DataError);
}

TEST(Io, ReadLinesDropsFinalTerminator) {
  fixture::TempDir dir("lines");
  fixture::write(dir / "a.txt", "x\ny\n");
  EXPECT_EQ(io::read_lines(dir / "a.txt"), (std::vector<std::string>{"x", "y"}));
  fixture::write(dir / "b.txt", "x\r\ny");
  EXPECT_EQ(io::read_lines(dir / "b.txt"), (std::vector<std::string>{"x", "y"}));
}

TEST(Ingest, EmptyFileGivesNoPosts) { EXPECT_TRUE(parse("").empty()); }

TEST(Ingest, WellFormedLinesKeepFileOrder) {
  const auto posts = parse(
      R"({"id":"b","subreddit":"x","title":"t","selftext":"one","created_utc":5})"
      "\n"
      R"({"id":"a","subreddit":"y","selftext":"two","extra":[1,2]})"
      "\n\n"
      R"({"id":"c","subreddit":"x","created_utc":"17"})"
      "\n");
  ASSERT_EQ(posts.size(), 3u);
  EXPECT_EQ(posts[0].id, "b");
  EXPECT_EQ(posts[0].created_utc, 5);
  EXPECT_EQ(posts[1].id, "a");
  EXPECT_EQ(posts[1].title, "");
  EXPECT_EQ(posts[2].id, "c");
  EXPECT_EQ(posts[2].created_utc, 17);
}

TEST(Ingest, MissingIdNamesTheLine) {
  const auto what = error_of(R"({"id":"a","subreddit":"x"})"
                             "\n"
                             R"({"subreddit":"x","selftext":"no id"})"
                             "\n");
  EXPECT_NE(what.find("line 2"), std::string::npos) << what;
}

TEST(Ingest, MalformedJsonNamesTheLine) {
  const auto what = error_of(R"({"id":"a","subreddit":"x"})"
                             "\n{not json\n");
  EXPECT_NE(what.find("line 2"), std::string::npos) << what;
}

TEST(Ingest, DuplicateIdIsNamed) {
  const auto what = error_of(R"({"id":"dup7","subreddit":"x"})"
                             "\n"
                             R"({"id":"dup7","subreddit":"y"})"
                             "\n");
  EXPECT_NE(what.find("dup7"), std::string::npos) << what;
}

TEST(Ingest, WritePostsRoundTrips) {
  fixture::TempDir dir("posts");
  const std::vector<RawPost> posts{fixture::raw("p1", "caf\xc3\xa9 \"quoted\"\nline", "s", "title")};
  ingest::write_posts(dir / "posts.jsonl", posts);
  const auto back = ingest::load_posts(dir / "posts.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].selftext, posts[0].selftext);
  EXPECT_EQ(back[0].title, "title");
}

TEST(Filter, SentinelsAndBlanksAreExcluded) {
  EXPECT_FALSE(ingest::is_text_post(fixture::raw("a", "[removed]")));
  EXPECT_FALSE(ingest::is_text_post(fixture::raw("a", "  [deleted] \n")));
  EXPECT_FALSE(ingest::is_text_post(fixture::raw("a", "")));
  EXPECT_FALSE(ingest::is_text_post(fixture::raw("a", " \t\n")));
  EXPECT_TRUE(ingest::is_text_post(fixture::raw("a", "[Removed]")));
  EXPECT_TRUE(ingest::is_text_post(fixture::raw("a", "[removed] but then text")));
}

TEST(Filter, TenPostCorpusKeepsSix) {
  std::vector<RawPost> posts;
  const std::vector<std::string> bodies{"one",       "[removed]", "two", "",      "three",
                                        "[deleted]", "four",      "   ", "five", "six"};
  for (std::size_t i = 0; i < bodies.size(); ++i) posts.push_back(fixture::raw("p" + std::to_string(i), bodies[i]));
  const auto kept = ingest::filter_text_posts(posts);
  ASSERT_EQ(kept.size(), 6u);
  EXPECT_EQ(kept.front().id, "p0");
  EXPECT_EQ(kept.back().id, "p9");
}

TEST(Filter, IdempotentAndShrinking) {
  const auto posts = ingest::load_posts(fixture::data("smoke_posts.jsonl"));
  const auto once = ingest::filter_text_posts(posts);
  const auto twice = ingest::filter_text_posts(once);
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].id, twice[i].id);
  EXPECT_LE(once.size(), posts.size());
  for (const auto& p : once) EXPECT_TRUE(ingest::is_text_post(p));
}

TEST(Stats, EmptyInputReportsZeros) {
  const auto stats = ingest::corpus_stats({});
  EXPECT_TRUE(stats.per_subreddit.empty());
  EXPECT_EQ(stats.corpus.posts, 0u);
  EXPECT_EQ(stats.corpus.mean_chars, 0.0);
  EXPECT_EQ(stats.corpus.mean_qmarks, 0.0);
}

TEST(Stats, QuestionMarksCountedInRawText) {
  const auto posts = normalized({fixture::raw("a", "a? b?")});
  EXPECT_EQ(ingest::corpus_stats(posts).corpus.mean_qmarks, 2.0);
}

TEST(Stats, MeanLength) {
  const auto posts = normalized({fixture::raw("a", std::string(100, 'x')), fixture::raw("b", std::string(300, 'y'))});
  EXPECT_EQ(ingest::corpus_stats(posts).corpus.mean_chars, 200.0);
}

TEST(Stats, Utf8CodePoints) {
  EXPECT_EQ(ingest::utf8_length("caf\xc3\xa9"), 4u);
  EXPECT_EQ(ingest::utf8_length("\xe2\x80\x99"), 1u);
}

TEST(Stats, FiftyPostCorpusMatchesRecount) {
  const auto posts = normalized(ingest::load_posts(fixture::data("stats_posts.jsonl")));
  const auto expected = nlohmann::json::parse(io::read_file(fixture::data("stats_expected.json")));
  const auto stats = ingest::corpus_stats(posts);
  auto check = [&](const ingest::SubredditStats& s) {
    SCOPED_TRACE(s.subreddit);
    const auto& row = expected.at(s.subreddit);
    EXPECT_EQ(s.posts, row[0].get<std::size_t>());
    EXPECT_NEAR(s.mean_chars, row[1].get<double>(), 1e-9);
    EXPECT_NEAR(s.mean_tokens, row[2].get<double>(), 1e-9);
    EXPECT_NEAR(s.mean_sentences, row[3].get<double>(), 1e-9);
    EXPECT_NEAR(s.mean_qmarks, row[4].get<double>(), 1e-9);
  };
  ASSERT_EQ(stats.per_subreddit.size() + 1, expected.size());
  for (const auto& s : stats.per_subreddit) check(s);
  check(stats.corpus);
}

TEST(Stats, PermutationInvariant) {
  auto posts = normalized(ingest::load_posts(fixture::data("stats_posts.jsonl")));
  const auto reference = ingest::macro_stats_csv(ingest::corpus_stats(posts));
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(posts.begin(), posts.end(), rng);
    EXPECT_EQ(ingest::macro_stats_csv(ingest::corpus_stats(posts)), reference);
  }
}

TEST(Stats, CsvHeader) {
  const auto csv = ingest::macro_stats_csv(ingest::corpus_stats({}));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "subreddit,posts,mean_chars,mean_tokens,mean_sentences,mean_qmarks");
}
