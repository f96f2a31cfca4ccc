#include "qforge/ingest.hpp"
#include "qforge/io.hpp"
#include "qforge/normalize.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

using namespace qforge;
using namespace qforge::normalize;

namespace {

const Lexicons& lexicons() {
  static const Lexicons l = Lexicons::load(fixture::resource_dir());
  return l;
}

std::string non_space_sorted(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  std::sort(out.begin(), out.end());
  return out;
}

std::string random_text(std::mt19937_64& rng, std::size_t length) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789      .,;:!?'\"-()[]/&%$#@*\n\t";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  for (std::size_t i = 0; i < length; ++i) s += alphabet[pick(rng)];
  return s;
}

// Renders a normalized corpus and its spelling corrections in a
// line-oriented form that is easy to review by eye.
std::string render(const std::vector<CleanPost>& posts, const CorrectionTable& table) {
  std::string out;
  for (const auto& [token, c] : table.entries()) out += "correct\t" + token + "\t" + c.replacement + "\n";
  for (const auto& p : posts) {
    out += p.id + "\ttitle\t" + p.title_norm + "\n";
    out += p.id + "\ttext\t" + p.text_norm + "\n";
    for (const auto& s : p.sentences) out += p.id + "\tsentence\t" + s + "\n";
  }
  return out;
}

std::string normalize_fixture() {
  const auto raw = ingest::load_posts(fixture::data("normalize_posts.jsonl"));
  const auto table = build_spelling_table(count_corpus_tokens(raw, lexicons(), {}));
  std::vector<CleanPost> clean;
  for (const auto& r : raw) clean.push_back(normalize_post(r, table, lexicons()));
  return render(clean, table);
}

}  // namespace

TEST(Tokenize, PunctuationSplit) {
  EXPECT_EQ(tokenize("Hello, world?"), (Tokens{"hello", ",", "world", "?"}));
}

TEST(Tokenize, ApostropheRetained) { EXPECT_EQ(tokenize("don't stop"), (Tokens{"don't", "stop"})); }

TEST(Tokenize, CurlyApostropheFolded) { EXPECT_EQ(tokenize("I\xe2\x80\x99m ok"), (Tokens{"i'm", "ok"})); }

TEST(Tokenize, HyphensAndDecimalsStayAttached) {
  EXPECT_EQ(tokenize("well-known 2.5 mg."), (Tokens{"well-known", "2.5", "mg", "."}));
}

TEST(Tokenize, TerminatorsAreSingleTokens) { EXPECT_EQ(tokenize("what?!"), (Tokens{"what", "?", "!"})); }

TEST(Tokenize, DetokenizeRetokenizeIsFixedPoint) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto text = random_text(rng, 1000);
    const auto once = tokenize(text);
    const auto again = tokenize(detokenize(once));
    EXPECT_EQ(again, once) << text;
    for (const auto& t : once) {
      EXPECT_FALSE(t.empty());
      EXPECT_EQ(t.find(' '), std::string::npos);
    }
  }
}

TEST(StripEntities, Urls) {
  EXPECT_EQ(strip_entities("see https://x.test now", false), "see now");
  EXPECT_EQ(strip_entities("go to www.x.test/a?b please", false), "go to please");
}

TEST(StripEntities, Emails) { EXPECT_EQ(strip_entities("mail a@b.test ok", false), "mail ok"); }

TEST(StripEntities, Pronouns) {
  EXPECT_EQ(strip_entities("i think you know", true), "think know");
  EXPECT_EQ(strip_entities("i think you know", false), "i think you know");
}

TEST(StripEntities, NeverJoinsNeighbours) {
  EXPECT_EQ(strip_entities("a https://x.test b", false), "a b");
  EXPECT_EQ(strip_entities("https://x.test", false), "");
}

TEST(Contractions, ReferenceForms) {
  EXPECT_EQ(expand_contractions(Tokens{"don't"}, lexicons().contractions), (Tokens{"do", "not"}));
  EXPECT_EQ(expand_contractions(Tokens{"ive"}, lexicons().contractions), (Tokens{"i", "have"}));
  EXPECT_EQ(expand_contractions(Tokens{"dont"}, lexicons().contractions), (Tokens{"do", "not"}));
  EXPECT_EQ(expand_contractions(Tokens{"banana"}, lexicons().contractions), (Tokens{"banana"}));
}

TEST(Abbreviations, ReferenceForms) {
  EXPECT_EQ(expand_abbreviations(Tokens{"a", "noob"}, lexicons().abbreviations),
            (Tokens{"a", "someone", "who", "is", "new"}));
  EXPECT_EQ(expand_abbreviations(Tokens{"smthing"}, lexicons().abbreviations), (Tokens{"something"}));
}

TEST(Lexicon, RejectsMalformedRows) {
  EXPECT_THROW(Lexicon::parse_tsv("noob\n"), DataError);
  EXPECT_NO_THROW(Lexicon::parse_tsv("# comment\n\nnoob\tsomeone new\n"));
}

TEST(Spelling, EditDistance) {
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  EXPECT_EQ(edit_distance("abc", "abc"), 0u);
}

TEST(Spelling, DefaultBudget) {
  SpellingOptions o;
  EXPECT_EQ(o.edit_budget(7), 1u);
  EXPECT_EQ(o.edit_budget(8), 2u);
  o.max_edit_distance = 3;
  EXPECT_EQ(o.edit_budget(4), 3u);
}

TEST(Spelling, CorrectsRareVariant) {
  const auto table = build_spelling_table({{"kratom", 500}, {"kratomm", 2}});
  ASSERT_NE(table.find("kratomm"), nullptr);
  EXPECT_EQ(table.find("kratomm")->replacement, "kratom");
  EXPECT_EQ(table.size(), 1u);
}

TEST(Spelling, RatioUnmet) { EXPECT_TRUE(build_spelling_table({{"abc", 3}, {"abd", 3}}).empty()); }

TEST(Spelling, TieBreaksLexicographically) {
  const auto table = build_spelling_table({{"abcd", 50}, {"abce", 50}, {"abcf", 1}});
  ASSERT_NE(table.find("abcf"), nullptr);
  EXPECT_EQ(table.find("abcf")->replacement, "abcd");
}

TEST(Spelling, EmptyCorpus) { EXPECT_TRUE(build_spelling_table({}).empty()); }

TEST(Spelling, MatchesBruteForceAndHasNoChains) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> letter(0, 3);
  std::uniform_int_distribution<int> len(3, 6);
  std::geometric_distribution<std::size_t> freq(0.05);
  for (int trial = 0; trial < 20; ++trial) {
    TokenCounts counts;
    for (int i = 0; i < 60; ++i) {
      std::string w;
      for (int k = len(rng); k > 0; --k) w += static_cast<char>('a' + letter(rng));
      counts[w] += 1 + freq(rng);
    }
    SpellingOptions options;
    const auto table = build_spelling_table(counts, options);
    for (const auto& [token, c] : table.entries()) {
      EXPECT_EQ(table.find(c.replacement), nullptr) << token << " -> " << c.replacement;
    }
    const auto applied = [&](const Tokens& t) { return table.apply(t); };
    Tokens all;
    for (const auto& [w, n] : counts) all.push_back(w);
    EXPECT_EQ(applied(applied(all)), applied(all));

    // Unchained single-step oracle: every entry either is the direct best
    // candidate or a collapsed chain of direct best candidates.
    auto best = [&](const std::string& t) -> std::string {
      const auto n = counts.at(t);
      if (n >= options.min_candidate_count) return "";
      std::string pick;
      std::size_t pick_count = 0;
      for (const auto& [c, m] : counts) {
        if (c == t || edit_distance(t, c) > options.edit_budget(t.size())) continue;
        if (static_cast<double>(m) < options.min_freq_ratio * static_cast<double>(n)) continue;
        if (m > pick_count) {
          pick = c;
          pick_count = m;
        }
      }
      return pick;
    };
    for (const auto& [t, n] : counts) {
      std::string target = best(t);
      for (int hop = 0; hop < 10 && !target.empty(); ++hop) {
        const auto next = best(target);
        if (next.empty()) break;
        target = next;
      }
      const auto* entry = table.find(t);
      if (target.empty()) {
        EXPECT_EQ(entry, nullptr) << t;
      } else {
        ASSERT_NE(entry, nullptr) << t;
        EXPECT_EQ(entry->replacement, target) << t;
      }
    }
  }
}

TEST(Segment, AbbreviationsAndDecimals) {
  EXPECT_EQ(segment_sentences("i took 2.5 mg. is that ok? thanks"),
            (std::vector<std::string>{"i took 2.5 mg.", "is that ok?", "thanks"}));
  EXPECT_EQ(segment_sentences("my dr. said e.g. this. ok"),
            (std::vector<std::string>{"my dr. said e.g. this.", "ok"}));
}

TEST(Segment, DetachedClosersStayWithTheirSentence) {
  EXPECT_EQ(segment_sentences("\" is it worth it ? \" my friend asked ."),
            (std::vector<std::string>{"\" is it worth it ? \"", "my friend asked ."}));
  EXPECT_EQ(segment_sentences("( like this . ) next ."), (std::vector<std::string>{"( like this . )", "next ."}));
  EXPECT_EQ(segment_sentences("done . \" quoted start \" end ."),
            (std::vector<std::string>{"done .", "\" quoted start \" end ."}));
  EXPECT_EQ(segment_sentences("at 3 a.m . and later ."), (std::vector<std::string>{"at 3 a.m . and later ."}));
}

TEST(Segment, FragmentAndTerminators) {
  EXPECT_EQ(segment_sentences("no punctuation here"), (std::vector<std::string>{"no punctuation here"}));
  EXPECT_EQ(segment_sentences("a? b! c."), (std::vector<std::string>{"a?", "b!", "c."}));
  EXPECT_EQ(segment_sentences("really ? ! yes ."), (std::vector<std::string>{"really ? !", "yes ."}));
  EXPECT_TRUE(segment_sentences("").empty());
}

TEST(Segment, PreservesNonSpaceCharacters) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto text = random_text(rng, 300);
    std::string joined;
    for (const auto& s : segment_sentences(text)) joined += s + " ";
    EXPECT_EQ(non_space_sorted(joined), non_space_sorted(text));
  }
}

TEST(NormalizePost, ReferenceExample) {
  const auto post = normalize_post(
      fixture::raw("p", "Ive recently taken interest in researching kratom and as a noob I wanted to run smthing by "
                        "you guys"),
      {}, lexicons());
  EXPECT_EQ(post.text_norm,
            "i have recently taken interest in researching kratom and as a someone who is new i wanted to run "
            "something by you guys .");
}

TEST(NormalizePost, EmptyInput) {
  const auto post = normalize_post(fixture::raw("p", ""), {}, lexicons());
  EXPECT_EQ(post.text_norm, "");
  EXPECT_TRUE(post.sentences.empty());
  EXPECT_TRUE(post.tokens.empty());
}

TEST(NormalizePost, SentencesReconstructTextAndTokensAreLowercase) {
  const auto raw = ingest::load_posts(fixture::data("smoke_posts.jsonl"));
  const auto table = build_spelling_table(count_corpus_tokens(raw, lexicons(), {}));
  for (const auto& r : raw) {
    const auto p = normalize_post(r, table, lexicons());
    std::string joined;
    for (const auto& s : p.sentences) joined += (joined.empty() ? "" : " ") + s;
    EXPECT_EQ(joined, p.text_norm) << p.id;
    for (const auto& t : p.tokens) {
      std::string lower = t;
      std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
      EXPECT_EQ(t, lower);
    }
  }
}

TEST(NormalizePost, Idempotent) {
  const auto raw = ingest::load_posts(fixture::data("smoke_posts.jsonl"));
  const auto table = build_spelling_table(count_corpus_tokens(raw, lexicons(), {}));
  for (const auto& r : raw) {
    const auto once = normalize_post(r, table, lexicons());
    auto again_raw = r;
    again_raw.selftext = once.text_norm;
    again_raw.title = once.title_norm;
    const auto twice = normalize_post(again_raw, table, lexicons());
    EXPECT_EQ(twice.text_norm, once.text_norm) << r.id;
    EXPECT_EQ(twice.title_norm, once.title_norm) << r.id;
  }
}

TEST(NormalizePost, TwentyPostGolden) {
  const auto rendered = normalize_fixture();
  const auto golden = fixture::data("normalize_golden.tsv");
  if (std::getenv("QFORGE_UPDATE_GOLDEN")) io::write_file(golden, rendered);
  EXPECT_EQ(rendered, io::read_file(golden));
  EXPECT_EQ(normalize_fixture(), rendered);
}

TEST(CorrectionTable, TsvRoundTripWithProvenance) {
  CorrectionTable table;
  table.add("kratomm", {"kratom", Provenance::spelling});
  table.add_lexicon(lexicons().abbreviations, Provenance::abbreviation);
  const auto back = CorrectionTable::from_tsv(table.to_tsv());
  EXPECT_EQ(back.to_tsv(), table.to_tsv());
  ASSERT_NE(back.find("noob"), nullptr);
  EXPECT_EQ(back.find("noob")->provenance, Provenance::abbreviation);
}

TEST(CleanPosts, JsonlRoundTrip) {
  const auto p = normalize_post(fixture::raw("x1", "Can't sleep. Is this normal?", "s", "Help"), {}, lexicons());
  const std::vector<CleanPost> posts{p};
  const auto back = clean_posts_from_jsonl(clean_posts_jsonl(posts));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].text_norm, p.text_norm);
  EXPECT_EQ(back[0].sentences, p.sentences);
  EXPECT_EQ(back[0].tokens, p.tokens);
  EXPECT_EQ(back[0].raw_text, p.raw_text);
}
