#pragma once

#include "qforge/common.hpp"
#include "qforge/qdetect.hpp"
#include "qforge/summarize.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qforge {

namespace fs = std::filesystem;

// Plain key = value file, '#' comments. Relative paths resolve against the
// config file's directory. Unknown keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 0;
  fs::path input;
  fs::path output_dir;
  fs::path resources;
  std::size_t workers = 1;
  bool resume = false;

  bool drop_pronouns = false;
  double spelling_ratio = 10.0;
  std::optional<std::size_t> spelling_max_edit;

  qdetect::Engine detector = qdetect::Engine::heuristic;
  fs::path question_scores;
  double question_threshold = 0.5;

  fs::path summaries;  // external summaries; baseline when empty
  std::size_t summary_max_tokens = 100;
  summarize::RougeVariant rouge = summarize::RougeVariant::l;

  fs::path embeddings;  // embeddings.f32; manifest at embeddings_manifest
  fs::path embeddings_manifest;
  bool embedding_fallback = true;
  std::size_t embedding_dim = 256;

  std::size_t n_neighbors = 15;
  Metric metric = Metric::cosine;
  std::size_t out_dim = 5;
  std::size_t epochs = 200;
  std::size_t neg_samples = 5;
  double min_dist = 0.1;
  double spread = 1.0;
  double learning_rate = 1.0;

  std::vector<std::size_t> sweep_sizes{3, 5, 7, 9, 12, 15, 20, 25, 30, 50, 100, 150, 200, 220, 240, 250, 260, 500, 600};
  std::optional<std::size_t> min_cluster_size;  // overrides the sweep selection
  std::size_t min_samples = 0;                  // 0: same as min_cluster_size
  std::size_t coherence_top_n = 10;
  bool coherence_include_noise = true;

  std::size_t keywords = 4;
  double diversity = 0.3;
  std::size_t keyword_candidates = 10;
  bool remove_stopwords = true;
  fs::path extra_stopwords;
  std::size_t min_token_length = 2;
  std::size_t representatives = 100;
  fs::path group_map;

  // Canonical key = value rendering of the parsed values (paths resolved).
  // hash() covers every key that can change results, so not output_dir,
  // workers or resume.
  std::map<std::string, std::string> values;

  // Validates and re-renders `values`; call after editing fields.
  void finalize();
  std::string value(const std::string& key) const;
  std::string hash() const;
};

PipelineConfig parse_config(std::string_view content, const fs::path& base_dir = ".");
PipelineConfig load_config(const fs::path& path);

}  // namespace qforge
