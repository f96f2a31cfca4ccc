#include "qforge/normalize.hpp"
#include "qforge/summarize.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qforge;
using namespace qforge::summarize;
using normalize::tokenize;
using Tokens = std::vector<std::string>;

namespace {

std::vector<bool> mask_of(const CleanPost& post) {
  std::vector<bool> mask;
  for (const auto& s : post.sentences) mask.push_back(!s.empty() && s.back() == '?');
  return mask;
}

Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len, int vocab) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  Tokens t;
  for (auto n = len(rng); n > 0; --n) t.push_back("w" + std::to_string(word(rng)));
  return t;
}

}  // namespace

TEST(Baseline, SharedContextEmittedOnce) {
  const auto post = fixture::clean("p", {"s0 .", "s1 .", "s2 ?", "s3 .", "s4 ?"});
  const auto s = baseline_summary(post, mask_of(post));
  EXPECT_EQ(s.text, "s0 . s1 . s2 ? s3 . s4 ?");
  EXPECT_EQ(s.source_sentences, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(s.kind, SummaryKind::baseline);
}

TEST(Baseline, SingleQuestionAndLeadingQuestion) {
  const auto one = fixture::clean("p", {"why ?"});
  EXPECT_EQ(baseline_summary(one, mask_of(one)).text, "why ?");
  const auto first = fixture::clean("p", {"how ?", "a .", "b .", "c .", "d ."});
  EXPECT_EQ(baseline_summary(first, mask_of(first)).text, "how ?");
}

TEST(Baseline, AtMostTwoPredecessors) {
  const auto post = fixture::clean("p", {"a .", "b .", "c .", "d .", "e ?"});
  EXPECT_EQ(baseline_summary(post, mask_of(post)).text, "c . d . e ?");
}

TEST(Baseline, NoQuestionIsAnError) {
  const auto post = fixture::clean("p", {"a ."});
  EXPECT_THROW(baseline_summary(post, mask_of(post)), DataError);
}

TEST(Baseline, TruncatesAtSentenceBoundary) {
  std::string fifty;
  for (int i = 0; i < 49; ++i) fifty += "w ";
  const auto post = fixture::clean("p", {fifty + ".", fifty + "?", "x ?"});
  const auto s = baseline_summary(post, mask_of(post));
  EXPECT_EQ(tokenize(s.text).size(), 100u);
  EXPECT_EQ(s.source_sentences, (std::vector<std::size_t>{0, 1}));
}

TEST(Baseline, HardTruncatesOverlongFirstSentence) {
  std::string longest;
  for (int i = 0; i < 150; ++i) longest += "w" + std::to_string(i) + " ";
  const auto post = fixture::clean("p", {longest + "?"});
  const auto s = baseline_summary(post, mask_of(post));
  const auto tokens = tokenize(s.text);
  ASSERT_EQ(tokens.size(), 100u);
  EXPECT_EQ(tokens.front(), "w0");
  EXPECT_EQ(tokens.back(), "w99");
}

TEST(Baseline, CapIndicesAndQuestionsOnRandomPosts) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> sentences;
    const auto n = 1 + rng() % 15;
    for (std::size_t i = 0; i < n; ++i) {
      std::string s;
      for (auto w = 1 + rng() % 25; w > 0; --w) s += "t" + std::to_string(rng() % 50) + " ";
      s += (rng() % 3 == 0 || i + 1 == n) ? "?" : ".";
      sentences.push_back(s);
    }
    const auto post = fixture::clean("p", sentences);
    const auto s = baseline_summary(post, mask_of(post));
    const auto tokens = tokenize(s.text);
    EXPECT_LE(tokens.size(), 100u);
    for (std::size_t i = 1; i < s.source_sentences.size(); ++i)
      EXPECT_LT(s.source_sentences[i - 1], s.source_sentences[i]);
    // Untruncated summaries contain every question; truncation only drops a suffix.
    std::string rebuilt;
    for (auto idx : s.source_sentences) rebuilt += (rebuilt.empty() ? "" : " ") + sentences[idx];
    if (tokenize(rebuilt).size() <= 100) {
      EXPECT_EQ(s.text, normalize::detokenize(tokenize(rebuilt)));
    }
  }
}

TEST(Bleu, TextbookPair) {
  // p1 = 3/3, p2 = 2/2, p3 = 1/1, p4 over zero 4-grams = 1, BP = exp(1 - 4/3)
  const Tokens c{"the", "cat", "sat"}, r{"the", "cat", "sat", "down"};
  EXPECT_NEAR(bleu(c, r), std::exp(1.0 - 4.0 / 3.0), 1e-12);
}

TEST(Bleu, IdentityAndDisjoint) {
  const Tokens a{"a", "b", "c", "d", "e"};
  EXPECT_EQ(bleu(a, a), 1.0);
  EXPECT_EQ(bleu(Tokens{"x", "y"}, a), 0.0);
  EXPECT_EQ(bleu(Tokens{}, a), 0.0);
}

TEST(Bleu, MatchesBruteForceOracle) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = random_tokens(rng, 20, 8), r = random_tokens(rng, 20, 8);
    const double v = bleu(c, r);
    EXPECT_NEAR(v, oracle::bleu(c, r), 1e-9);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Rouge, IdentityReversedEmpty) {
  const Tokens a{"a", "b", "c", "d"};
  EXPECT_EQ(rouge_l(a, a), 1.0);
  const Tokens rev{"d", "c", "b", "a"};
  EXPECT_NEAR(rouge_l(rev, a), 0.25, 1e-12);
  EXPECT_EQ(rouge_l(Tokens{}, a), 0.0);
  EXPECT_EQ(lcs_length(rev, a), 1u);
}

TEST(Rouge, MatchesLcsOracle) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = random_tokens(rng, 25, 6), r = random_tokens(rng, 25, 6);
    EXPECT_EQ(lcs_length(c, r), oracle::lcs(c, r));
    EXPECT_NEAR(rouge_l(c, r), oracle::rouge_l(c, r), 1e-9);
  }
}

TEST(Rouge, UnigramVariant) {
  EXPECT_NEAR(rouge_1(Tokens{"a", "b", "x"}, Tokens{"b", "a", "c", "d"}), 2.0 * (2.0 / 3) * 0.5 / (2.0 / 3 + 0.5),
              1e-12);
  EXPECT_EQ(parse_rouge_variant("1"), RougeVariant::one);
  EXPECT_THROW(parse_rouge_variant("2"), ConfigError);
}

TEST(Scores, IdenticalCandidatesScoreOne) {
  const std::vector<CleanPost> posts{fixture::clean("a", {"x ?"}, "s1"), fixture::clean("b", {"y ?"}, "s2")};
  SummaryMap m;
  m["a"] = {"a", "how do i taper ?", SummaryKind::baseline, {0}};
  m["b"] = {"b", "is it safe ?", SummaryKind::baseline, {0}};
  for (const auto& s : score_by_subreddit(posts, m, m)) {
    EXPECT_EQ(s.bleu, 1.0);
    EXPECT_EQ(s.rouge, 1.0);
  }
}

TEST(Scores, PerSubredditMean) {
  const std::vector<CleanPost> posts{fixture::clean("a", {"x ?"}, "s"), fixture::clean("b", {"y ?"}, "s")};
  SummaryMap cand, ref;
  // ROUGE-L of a 5-token candidate sharing 1 token with a 5-token reference is 0.2;
  // sharing 3 in order gives 0.6.
  cand["a"] = {"a", "a b c d e", SummaryKind::external, {}};
  ref["a"] = {"a", "a v w x y", SummaryKind::baseline, {}};
  cand["b"] = {"b", "a b c d e", SummaryKind::external, {}};
  ref["b"] = {"b", "a b c x y", SummaryKind::baseline, {}};
  const auto scores = score_by_subreddit(posts, cand, ref);
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_EQ(scores[0].key, "s");
  EXPECT_EQ(scores[0].posts, 2u);
  EXPECT_NEAR(scores[0].rouge, 0.4, 1e-12);
}

TEST(Scores, UnmatchedIdsAreErrors) {
  const std::vector<CleanPost> posts{fixture::clean("a", {"x ?"})};
  SummaryMap cand, ref;
  ref["a"] = {"a", "x ?", SummaryKind::baseline, {0}};
  EXPECT_THROW(score_by_subreddit(posts, cand, ref), DataError);
  EXPECT_THROW(score_by_subreddit(posts, ref, cand), DataError);
}

TEST(External, ParseKeepsTextAndRejectsMalformedRows) {
  const auto m = parse_external_summaries(R"({"post_id":"a","summary":"Some  text, as given?"})"
                                          "\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.at("a").text, "Some  text, as given?");
  EXPECT_EQ(m.at("a").kind, SummaryKind::external);
  EXPECT_THROW(parse_external_summaries(R"({"post_id":"a"})"), DataError);
  EXPECT_THROW(parse_external_summaries("{bad"), DataError);
  EXPECT_THROW(parse_external_summaries(R"({"post_id":"a","summary":"x"})"
                                        "\n"
                                        R"({"post_id":"a","summary":"y"})"),
               DataError);
}

TEST(External, SummariesJsonlRoundTrip) {
  SummaryMap m;
  m["a"] = {"a", "why ? ok .", SummaryKind::baseline, {0, 2}};
  m["b"] = {"b", "external text", SummaryKind::external, {}};
  const auto back = summaries_from_jsonl(summaries_jsonl(m));
  EXPECT_EQ(summaries_jsonl(back), summaries_jsonl(m));
  EXPECT_EQ(back.at("a").source_sentences, (std::vector<std::size_t>{0, 2}));
}
