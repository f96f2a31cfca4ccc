#include "qforge/config.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace qforge;

namespace {

std::string error_of(const std::string& content, const fs::path& base) {
  try {
    parse_config(content, base);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

struct ConfigDir {
  fixture::TempDir dir{"config"};
  ConfigDir() { fixture::write(dir / "posts.jsonl", ""); }
  std::string base() const { return "seed = 7\ninput = posts.jsonl\noutput_dir = out\n"; }
};

}  // namespace

TEST(Config, DefaultsAndResolvedPaths) {
  ConfigDir d;
  const auto c = parse_config(d.base() + "# comment\n\n  workers = 3  # trailing\n", d.dir.path());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.input, d.dir / "posts.jsonl");
  EXPECT_EQ(c.output_dir, d.dir / "out");
  EXPECT_EQ(c.workers, 3u);
  EXPECT_EQ(c.detector, qdetect::Engine::heuristic);
  EXPECT_EQ(c.n_neighbors, 15u);
  EXPECT_EQ(c.out_dim, 5u);
  EXPECT_EQ(c.metric, Metric::cosine);
  EXPECT_EQ(c.keywords, 4u);
  EXPECT_EQ(c.diversity, 0.3);
  EXPECT_EQ(c.summary_max_tokens, 100u);
  EXPECT_EQ(c.coherence_top_n, 10u);
  EXPECT_EQ(c.sweep_sizes,
            (std::vector<std::size_t>{3, 5, 7, 9, 12, 15, 20, 25, 30, 50, 100, 150, 200, 220, 240, 250, 260, 500, 600}));
  EXPECT_FALSE(c.min_cluster_size.has_value());
  EXPECT_EQ(c.value("umap.metric"), "cosine");
  EXPECT_EQ(c.value("cluster.min_cluster_size"), "auto");
}

TEST(Config, EveryKnobParses) {
  ConfigDir d;
  const auto c = parse_config(d.base() +
                                  "normalize.drop_pronouns = yes\n"
                                  "normalize.spelling_ratio = 5\n"
                                  "normalize.spelling_max_edit = 2\n"
                                  "detect.engine = external\n"
                                  "detect.scores = /abs/scores.jsonl\n"
                                  "detect.threshold = 0.7\n"
                                  "summarize.external = s.jsonl\n"
                                  "summarize.max_tokens = 60\n"
                                  "summarize.rouge = 1\n"
                                  "embed.payload = e.f32\n"
                                  "embed.manifest = e.json\n"
                                  "embed.fallback = off\n"
                                  "embed.dim = 128\n"
                                  "umap.n_neighbors = 10\n"
                                  "umap.metric = euclidean\n"
                                  "umap.out_dim = 2\n"
                                  "umap.epochs = 50\n"
                                  "umap.neg_samples = 3\n"
                                  "umap.min_dist = 0.05\n"
                                  "umap.spread = 2\n"
                                  "umap.learning_rate = 0.5\n"
                                  "sweep.sizes = 20, 50 ,100\n"
                                  "sweep.top_n = 5\n"
                                  "sweep.include_noise = false\n"
                                  "cluster.min_cluster_size = 50\n"
                                  "cluster.min_samples = 5\n"
                                  "topics.keywords = 3\n"
                                  "topics.diversity = 0.5\n"
                                  "topics.candidates = 8\n"
                                  "topics.remove_stopwords = 0\n"
                                  "topics.extra_stopwords = extra.txt\n"
                                  "topics.min_token_length = 3\n"
                                  "topics.representatives = 20\n"
                                  "report.group_map = groups.tsv\n"
                                  "resume = true\n",
                              d.dir.path());
  EXPECT_TRUE(c.drop_pronouns);
  EXPECT_EQ(c.spelling_max_edit, 2u);
  EXPECT_EQ(c.detector, qdetect::Engine::external);
  EXPECT_EQ(c.question_scores, fs::path("/abs/scores.jsonl"));
  EXPECT_EQ(c.question_threshold, 0.7);
  EXPECT_EQ(c.summaries, d.dir / "s.jsonl");
  EXPECT_EQ(c.rouge, summarize::RougeVariant::one);
  EXPECT_FALSE(c.embedding_fallback);
  EXPECT_EQ(c.metric, Metric::euclidean);
  EXPECT_EQ(c.sweep_sizes, (std::vector<std::size_t>{20, 50, 100}));
  EXPECT_FALSE(c.coherence_include_noise);
  EXPECT_EQ(c.min_cluster_size, 50u);
  EXPECT_FALSE(c.remove_stopwords);
  EXPECT_EQ(c.group_map, d.dir / "groups.tsv");
  EXPECT_TRUE(c.resume);
  EXPECT_EQ(c.value("sweep.sizes"), "20,50,100");
}

TEST(Config, Errors) {
  ConfigDir d;
  const auto base = d.dir.path();
  EXPECT_NE(error_of("input = posts.jsonl\noutput_dir = out\n", base).find("seed"), std::string::npos);
  EXPECT_NE(error_of(d.base() + "colour = blue\n", base).find("unknown key 'colour'"), std::string::npos);
  EXPECT_NE(error_of(d.base() + "seed = 8\n", base).find("already set on line 1"), std::string::npos);
  EXPECT_NE(error_of(d.base() + "just text\n", base).find("line 4"), std::string::npos);
  EXPECT_NE(error_of(d.base() + "workers = many\n", base).find("bad number"), std::string::npos);
  EXPECT_NE(error_of(d.base() + "workers = 0\n", base), "");
  EXPECT_NE(error_of(d.base() + "resume = maybe\n", base), "");
  EXPECT_NE(error_of(d.base() + "detect.engine = bert\n", base), "");
  EXPECT_NE(error_of(d.base() + "detect.engine = external\n", base).find("detect.scores"), std::string::npos);
  EXPECT_NE(error_of(d.base() + "detect.threshold = 1.5\n", base), "");
  EXPECT_NE(error_of(d.base() + "umap.metric = manhattan\n", base), "");
  EXPECT_NE(error_of(d.base() + "umap.min_dist = 1\n", base), "");
  EXPECT_NE(error_of(d.base() + "sweep.sizes = 5,,7\n", base), "");
  EXPECT_NE(error_of(d.base() + "sweep.sizes = 1,5\n", base), "");
  EXPECT_NE(error_of(d.base() + "embed.payload = e.f32\n", base).find("go together"), std::string::npos);
  EXPECT_NE(error_of(d.base() + "topics.candidates = 2\n", base), "");
  EXPECT_NE(error_of(d.base() + "cluster.min_cluster_size = 1\n", base), "");
  EXPECT_NE(error_of("seed = 1\ninput = missing.jsonl\noutput_dir = out\n", base).find("does not exist"),
            std::string::npos);
  EXPECT_NE(error_of("seed = 1\ninput = posts.jsonl\n", base).find("output_dir"), std::string::npos);
  EXPECT_THROW(load_config(d.dir / "nope.cfg"), ConfigError);
}

TEST(Config, HashIgnoresRunPlumbingOnly) {
  ConfigDir d;
  const auto a = parse_config(d.base(), d.dir.path());
  const auto b = parse_config("workers = 8\nresume = true\n" + d.base(), d.dir.path());
  auto c_text = d.base();
  c_text.replace(c_text.find("= out"), 5, "= elsewhere");
  const auto c = parse_config(c_text, d.dir.path());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash(), c.hash());
  EXPECT_NE(a.hash(), parse_config(d.base() + "umap.epochs = 10\n", d.dir.path()).hash());
  EXPECT_NE(a.hash(), parse_config("seed = 8\ninput = posts.jsonl\noutput_dir = out\n", d.dir.path()).hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Config, LoadResolvesAgainstFileDirectory) {
  ConfigDir d;
  fs::create_directories(d.dir / "exp");
  fixture::write(d.dir / "exp" / "run.cfg", "seed = 1\ninput = ../posts.jsonl\noutput_dir = artifacts\n");
  const auto c = load_config(d.dir / "exp" / "run.cfg");
  EXPECT_EQ(c.input, d.dir / "posts.jsonl");
  EXPECT_EQ(c.output_dir, d.dir / "exp" / "artifacts");
}

TEST(Config, FinalizeRevalidatesEdits) {
  ConfigDir d;
  auto c = parse_config(d.base(), d.dir.path());
  c.epochs = 25;
  c.finalize();
  EXPECT_EQ(c.value("umap.epochs"), "25");
  c.diversity = 2.0;
  EXPECT_THROW(c.finalize(), ConfigError);
  EXPECT_THROW(c.value("no.such.key"), Error);
}
