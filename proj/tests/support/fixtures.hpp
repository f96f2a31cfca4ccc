#pragma once

#include "qforge/common.hpp"
#include "qforge/io.hpp"
#include "qforge/post.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fixture {

namespace fs = std::filesystem;

inline fs::path data_dir() { return QFORGE_TEST_DATA; }
inline fs::path resource_dir() { return QFORGE_RESOURCE_DIR; }
inline fs::path data(const std::string& name) { return data_dir() / name; }

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("qforge_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write(const fs::path& path, const std::string& content) { qforge::io::write_file(path, content); }

inline qforge::RawPost raw(std::string id, std::string selftext, std::string subreddit = "sub",
                           std::string title = "") {
  qforge::RawPost p;
  p.id = std::move(id);
  p.subreddit = std::move(subreddit);
  p.title = std::move(title);
  p.selftext = std::move(selftext);
  return p;
}

// A post whose sentences are given verbatim (no normalization involved).
inline qforge::CleanPost clean(std::string id, std::vector<std::string> sentences, std::string subreddit = "sub") {
  qforge::CleanPost p;
  p.id = std::move(id);
  p.subreddit = std::move(subreddit);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) p.text_norm += ' ';
    p.text_norm += sentences[i];
    std::istringstream words(sentences[i]);
    for (std::string w; words >> w;) p.tokens.push_back(w);
  }
  p.raw_text = p.text_norm;
  p.sentences = std::move(sentences);
  return p;
}

// Gaussian blobs: `per` points around each centre, row-major.
inline qforge::RowMatrixd blobs(const std::vector<std::vector<double>>& centres, std::size_t per, double scale,
                                std::uint64_t seed, std::vector<int>* truth = nullptr) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, scale);
  const auto d = centres.front().size();
  qforge::RowMatrixd x(static_cast<Eigen::Index>(centres.size() * per), static_cast<Eigen::Index>(d));
  if (truth) truth->clear();
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < centres.size(); ++c) {
    for (std::size_t p = 0; p < per; ++p, ++row) {
      for (std::size_t k = 0; k < d; ++k) x(row, static_cast<Eigen::Index>(k)) = centres[c][k] + noise(rng);
      if (truth) truth->push_back(static_cast<int>(c));
    }
  }
  return x;
}

// Three token-disjoint passage families; family f draws 6-12 words from its
// own 20-word vocabulary.
inline std::vector<std::string> family_passages(std::size_t per_family, std::uint64_t seed, std::vector<int>* truth) {
  static const std::vector<std::vector<std::string>> vocab = {
      {"suboxone", "methadone", "taper", "clinic", "withdrawal", "buprenorphine", "induction", "detox", "cravings",
       "sublocade", "naloxone", "relapse", "counselor", "dosage", "strips", "film", "program", "pharmacy",
       "insurance", "prescriber"},
      {"xanax", "klonopin", "valium", "panic", "benzo", "alprazolam", "clonazepam", "insomnia", "seizures",
       "diazepam", "ativan", "lorazepam", "anxiety", "tolerance", "ashton", "manual", "crossover", "microtaper",
       "akathisia", "tinnitus"},
      {"kratom", "powder", "capsules", "strain", "vendor", "maeng", "borneo", "grams", "extract", "bali",
       "thai", "malay", "potency", "toss", "wash", "tea", "leaf", "batch", "shipping", "tolerant"},
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(6, 12);
  std::uniform_int_distribution<std::size_t> pick(0, 19);
  std::vector<std::string> out;
  if (truth) truth->clear();
  for (std::size_t i = 0; i < per_family * vocab.size(); ++i) {
    const std::size_t f = i % vocab.size();
    std::string text;
    const auto len = length(rng);
    for (std::size_t w = 0; w < len; ++w) {
      if (w) text += ' ';
      text += vocab[f][pick(rng)];
    }
    out.push_back(text);
    if (truth) truth->push_back(static_cast<int>(f));
  }
  return out;
}

template <typename Fn>
double seconds(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace fixture
