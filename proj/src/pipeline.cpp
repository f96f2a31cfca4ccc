#include "qforge/pipeline.hpp"

#include "qforge/coherence.hpp"
#include "qforge/hdbscan.hpp"
#include "qforge/ingest.hpp"
#include "qforge/io.hpp"
#include "qforge/normalize.hpp"
#include "qforge/passage.hpp"
#include "qforge/qdetect.hpp"
#include "qforge/summarize.hpp"
#include "qforge/topics.hpp"
#include "qforge/umap.hpp"

#include <json.hpp>

#include <chrono>
#include <iostream>

namespace qforge::pipeline {

using nlohmann::json;

namespace {

const std::map<Stage, std::string>& stage_names() {
  static const std::map<Stage, std::string> names = {
      {Stage::ingest, "ingest"},   {Stage::normalize, "normalize"}, {Stage::detect, "detect"},
      {Stage::summarize, "summarize"}, {Stage::embed, "embed"},     {Stage::reduce, "reduce"},
      {Stage::sweep, "sweep"},     {Stage::cluster, "cluster"},     {Stage::topics, "topics"},
      {Stage::report, "report"}};
  return names;
}

std::string checksum_or_missing(const fs::path& p) {
  if (p.empty()) return "none";
  return fs::exists(p) ? io::file_checksum(p) : "missing";
}

fs::path stamp_path(const PipelineConfig& c, Stage s) { return c.output_dir / "stamps" / (to_string(s) + ".json"); }

struct Stamp {
  std::string key;
  std::map<std::string, std::string> outputs;
};

std::optional<Stamp> read_stamp(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    const auto j = json::parse(io::read_file(path));
    return Stamp{j.at("key").get<std::string>(), j.at("outputs").get<std::map<std::string, std::string>>()};
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": unreadable stamp (" + e.what() + ")");
  }
}

std::vector<std::string> ids_of(const std::vector<passage::Passage>& passages) {
  std::vector<std::string> ids;
  for (const auto& p : passages) ids.push_back(p.post_id);
  return ids;
}

std::vector<int> parse_labels_csv(std::string_view content, std::span<const std::string> ids) {
  std::vector<int> labels;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const std::string line(content.substr(pos, end - pos));
    pos = end + 1;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw DataError("cluster labels: malformed row '" + line + "'");
    auto id = line.substr(0, comma);
    if (id.size() >= 2 && id.front() == '"') id = id.substr(1, id.size() - 2);
    const auto row = labels.size();
    if (row >= ids.size() || id != ids[row]) throw DataError("cluster labels: id order mismatch at row " + std::to_string(row));
    labels.push_back(std::stoi(line.substr(comma + 1)));
  }
  if (labels.size() != ids.size()) throw DataError("cluster labels: row count does not match passages");
  return labels;
}

}  // namespace

const std::vector<Stage>& stages() {
  static const std::vector<Stage> all = {Stage::ingest, Stage::normalize, Stage::detect, Stage::summarize,
                                         Stage::embed,  Stage::reduce,    Stage::sweep,  Stage::cluster,
                                         Stage::topics, Stage::report};
  return all;
}

std::string to_string(Stage stage) { return stage_names().at(stage); }

Stage parse_stage(const std::string& name) {
  for (const auto& [s, n] : stage_names())
    if (n == name) return s;
  throw ConfigError("unknown stage '" + name + "'");
}

std::map<std::string, std::string> RunManifest::checksums() const {
  std::map<std::string, std::string> out;
  for (const auto& s : stages)
    for (const auto& [name, sum] : s.outputs) out[s.stage + "/" + name] = sum;
  return out;
}

std::string RunManifest::to_json() const {
  json list = json::array();
  for (const auto& s : stages)
    list.push_back({{"stage", s.stage}, {"key", s.key}, {"outputs", s.outputs}, {"seconds", s.seconds},
                    {"resumed", s.resumed}});
  return json{{"config_hash", config_hash}, {"version", version}, {"stages", list}}.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view content) {
  const auto j = json::parse(content);
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.version = j.at("version").get<std::string>();
  for (const auto& s : j.at("stages"))
    m.stages.push_back({s.at("stage").get<std::string>(), s.at("key").get<std::string>(),
                        s.at("outputs").get<std::map<std::string, std::string>>(), s.at("seconds").get<double>(),
                        s.at("resumed").get<bool>()});
  return m;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  const auto& c = config_;
  const auto res = [&](const char* file) { return checksum_or_missing(c.resources / file); };
  auto values = [&](std::initializer_list<const char*> keys) {
    std::string out;
    for (const auto* k : keys) out += std::string(k) + "=" + c.value(k) + "\n";
    return out;
  };
  const std::map<Stage, std::string> own = {
      {Stage::ingest, "input#" + checksum_or_missing(c.input) + "\n"},
      {Stage::normalize, values({"normalize.drop_pronouns", "normalize.spelling_ratio", "normalize.spelling_max_edit"}) +
                             "contractions#" + res("contractions.tsv") + "\nabbreviations#" +
                             res("abbreviations.tsv") + "\n"},
      {Stage::detect, values({"detect.engine", "detect.threshold"}) + "scores#" +
                          (c.detector == qdetect::Engine::external ? checksum_or_missing(c.question_scores) : "none") +
                          "\nrules#" + res("rhetorical.txt") + res("interrogative_leads.txt") +
                          res("lead_fillers.txt") + "\n"},
      {Stage::summarize, values({"summarize.max_tokens", "summarize.rouge"}) + "external#" +
                             checksum_or_missing(c.summaries) + "\n"},
      {Stage::embed, values({"seed", "embed.fallback", "embed.dim"}) + "payload#" + checksum_or_missing(c.embeddings) +
                         "\nmanifest#" + checksum_or_missing(c.embeddings_manifest) + "\n"},
      {Stage::reduce, values({"seed", "umap.n_neighbors", "umap.metric", "umap.out_dim", "umap.epochs",
                              "umap.neg_samples", "umap.min_dist", "umap.spread", "umap.learning_rate"})},
      {Stage::sweep, values({"sweep.sizes", "sweep.top_n", "sweep.include_noise", "cluster.min_samples",
                             "topics.remove_stopwords", "topics.min_token_length"}) +
                         "stopwords#" + res("stopwords_en.txt") + "\nextra#" + checksum_or_missing(c.extra_stopwords) +
                         "\n"},
      {Stage::cluster, values({"cluster.min_cluster_size", "cluster.min_samples"})},
      {Stage::topics, values({"seed", "embed.dim", "topics.keywords", "topics.diversity", "topics.candidates",
                              "topics.representatives"})},
      {Stage::report, "group_map#" + checksum_or_missing(c.group_map) + "\n"},
  };
  std::string upstream;
  for (auto s : stages()) {
    keys_[s] = io::hex64(io::fnv1a64(to_string(s) + "\n" + own.at(s) + "upstream#" + upstream + "\n"));
    upstream = keys_[s];
  }
}

std::vector<std::string> Pipeline::outputs(Stage stage) const {
  switch (stage) {
    case Stage::ingest:
      return {"posts.jsonl", "ingest.json"};
    case Stage::normalize:
      return {"clean_posts.jsonl", "corrections.tsv"};
    case Stage::detect:
      return {"question_labels.jsonl", "question_stats.json", "question_positions.csv"};
    case Stage::summarize: {
      std::vector<std::string> out{"baseline_summaries.jsonl", "summaries.jsonl"};
      if (!config_.summaries.empty()) out.push_back("summary_scores.csv");
      return out;
    }
    case Stage::embed:
      return {"passages.jsonl", "embeddings.f32", "embeddings.manifest.json"};
    case Stage::reduce:
      return {"layout.f32", "layout.manifest.json"};
    case Stage::sweep:
      return {"sweep.csv", "sweep.json"};
    case Stage::cluster:
      return {"cluster_labels.csv", "condensed_tree.json", "cluster.json"};
    case Stage::topics:
      return {"topics.json", "topic_table.csv", "topic_table.json", "representatives.json", "coherence.json"};
    case Stage::report: {
      std::vector<std::string> out{"reports/topic_distribution.csv", "reports/topic_distribution.json",
                                   "reports/top20_topics.csv",       "reports/top20_topics.json",
                                   "reports/question_positions.csv", "reports/question_stats.json",
                                   "reports/macro_stats.csv",        "reports/sweep.csv",
                                   "reports/sweep.json"};
      if (!config_.group_map.empty()) {
        out.push_back("reports/group_distribution.csv");
        out.push_back("reports/group_distribution.json");
      }
      if (!config_.summaries.empty()) out.push_back("reports/summary_scores.csv");
      return out;
    }
  }
  return {};
}

void Pipeline::check_upstream(Stage stage) const {
  for (auto previous : stages()) {
    if (previous == stage) break;
    const auto stamp = read_stamp(stamp_path(config_, previous));
    if (!stamp)
      throw DataError("missing artifacts of stage '" + to_string(previous) + "' in " + config_.output_dir.string() +
                      "; run it first");
    if (stamp->key != key(previous))
      throw ConfigError("artifacts of stage '" + to_string(previous) +
                        "' were produced with a different configuration or inputs; rerun from that stage");
    for (const auto& [name, sum] : stamp->outputs)
      if (checksum_or_missing(artifact(name)) != sum)
        throw DataError("artifact " + artifact(name).string() + " changed since stage '" + to_string(previous) +
                        "' wrote it");
  }
}

StageRecord Pipeline::run_stage(Stage stage) {
  const auto name = to_string(stage);
  StageRecord record;
  record.stage = name;
  record.key = key(stage);
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto stamp_file = stamp_path(config_, stage);
    if (config_.resume) {
      if (auto stamp = read_stamp(stamp_file)) {
        if (stamp->key != record.key)
          throw ConfigError("existing artifacts were produced with a different configuration or inputs (stamp " +
                            stamp->key + ", expected " + record.key + "); use a fresh output_dir or disable resume");
        bool intact = true;
        for (const auto& [file, sum] : stamp->outputs) intact = intact && checksum_or_missing(artifact(file)) == sum;
        if (intact) {
          record.outputs = stamp->outputs;
          record.resumed = true;
          return record;
        }
      }
    }
    check_upstream(stage);
    fs::create_directories(config_.output_dir);
    fs::remove(stamp_file);
    execute(stage);
    for (const auto& file : outputs(stage)) {
      if (!fs::exists(artifact(file))) throw StageError("expected artifact " + file + " was not written");
      record.outputs[file] = io::file_checksum(artifact(file));
    }
    io::write_file(stamp_file, json{{"stage", name}, {"key", record.key}, {"outputs", record.outputs}}.dump(2) + "\n");
  } catch (const ConfigError& e) {
    throw ConfigError("stage '" + name + "': " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage '" + name + "': " + e.what());
  } catch (const StageError& e) {
    throw StageError("stage '" + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw StageError("stage '" + name + "': " + e.what());
  }
  record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

RunManifest Pipeline::run() {
  RunManifest manifest;
  manifest.config_hash = config_.hash();
  manifest.version = kVersion;
  for (auto s : stages()) manifest.stages.push_back(run_stage(s));
  io::write_file(artifact("run_manifest.json"), manifest.to_json());
  return manifest;
}

namespace {

std::vector<CleanPost> load_clean(const Pipeline& p) {
  return normalize::clean_posts_from_jsonl(io::read_file(p.artifact("clean_posts.jsonl")));
}

qdetect::LabelSet load_question_labels(const Pipeline& p) {
  return qdetect::LabelSet::from_jsonl(io::read_file(p.artifact("question_labels.jsonl")));
}

std::vector<passage::Passage> load_passages(const Pipeline& p) {
  return passage::passages_from_jsonl(io::read_file(p.artifact("passages.jsonl")));
}

RowMatrixd load_layout_points(const Pipeline& p, std::span<const std::string> ids) {
  return umap::load_layout(p.artifact("layout.f32"), p.artifact("layout.manifest.json"), ids).coords.cast<double>();
}

std::vector<std::vector<std::string>> passage_tokens(const PipelineConfig& c,
                                                     std::span<const passage::Passage> passages) {
  topics::Stopwords stopwords;
  if (c.remove_stopwords) {
    std::vector<fs::path> files{c.resources / "stopwords_en.txt"};
    if (!c.extra_stopwords.empty()) files.push_back(c.extra_stopwords);
    stopwords = topics::load_stopwords(files);
  }
  std::vector<std::vector<std::string>> docs;
  for (const auto& p : passages)
    docs.push_back(topics::topic_tokens(p.text, c.remove_stopwords ? &stopwords : nullptr, c.min_token_length));
  return docs;
}

std::vector<int> load_cluster_labels(const Pipeline& p, std::span<const std::string> ids) {
  return parse_labels_csv(io::read_file(p.artifact("cluster_labels.csv")), ids);
}

void copy_artifact(const Pipeline& p, const std::string& from, const std::string& to) {
  io::write_file(p.artifact(to), io::read_file(p.artifact(from)));
}

}  // namespace

void Pipeline::execute(Stage stage) {
  const auto& c = config_;
  switch (stage) {
    case Stage::ingest: {
      const auto all = ingest::load_posts(c.input);
      const auto kept = ingest::filter_text_posts(all);
      ingest::write_posts(artifact("posts.jsonl"), kept);
      io::write_file(artifact("ingest.json"),
                     json{{"posts", all.size()}, {"text_posts", kept.size()}}.dump(2) + "\n");
      break;
    }
    case Stage::normalize: {
      const auto raw = ingest::load_posts(artifact("posts.jsonl"));
      const auto lexicons = normalize::Lexicons::load(c.resources);
      normalize::NormalizeOptions options;
      options.drop_pronouns = c.drop_pronouns;
      normalize::SpellingOptions spelling;
      spelling.min_freq_ratio = c.spelling_ratio;
      spelling.max_edit_distance = c.spelling_max_edit;
      const auto table = normalize::build_spelling_table(normalize::count_corpus_tokens(raw, lexicons, options), spelling);
      std::vector<CleanPost> clean;
      clean.reserve(raw.size());
      for (const auto& r : raw) clean.push_back(normalize::normalize_post(r, table, lexicons, options));
      auto audit = table;
      audit.add_lexicon(lexicons.contractions, normalize::Provenance::contraction);
      audit.add_lexicon(lexicons.abbreviations, normalize::Provenance::abbreviation);
      io::write_file(artifact("clean_posts.jsonl"), normalize::clean_posts_jsonl(clean));
      io::write_file(artifact("corrections.tsv"), audit.to_tsv());
      break;
    }
    case Stage::detect: {
      const auto posts = load_clean(*this);
      qdetect::LabelSet labels;
      switch (c.detector) {
        case qdetect::Engine::rule:
          labels = qdetect::detect_rule(posts);
          break;
        case qdetect::Engine::heuristic:
          labels = qdetect::detect_heuristic(posts, qdetect::HeuristicRules::load(c.resources));
          break;
        case qdetect::Engine::external:
          labels = qdetect::import_external_scores(c.question_scores, posts, c.question_threshold);
          break;
      }
      const auto stats = qdetect::question_stats(labels, posts);
      io::write_file(artifact("question_labels.jsonl"), labels.to_jsonl());
      io::write_file(artifact("question_stats.json"), qdetect::question_stats_json(stats));
      io::write_file(artifact("question_positions.csv"), qdetect::position_histogram_csv(stats));
      break;
    }
    case Stage::summarize: {
      const auto posts = load_clean(*this);
      const auto labels = load_question_labels(*this);
      const auto questions = qdetect::filter_question_posts(posts, labels);
      if (questions.empty()) throw DataError("no question-bearing posts to summarize");
      summarize::SummaryMap baseline;
      for (const auto& p : questions)
        baseline.emplace(p.id, summarize::baseline_summary(p, labels.question_mask(p), c.summary_max_tokens));
      io::write_file(artifact("baseline_summaries.jsonl"), summarize::summaries_jsonl(baseline));
      if (c.summaries.empty()) {
        io::write_file(artifact("summaries.jsonl"), summarize::summaries_jsonl(baseline));
        break;
      }
      const auto external = summarize::load_external_summaries(c.summaries);
      summarize::SummaryMap used;
      for (const auto& p : questions) {
        auto it = external.find(p.id);
        if (it == external.end()) throw DataError(c.summaries.string() + ": no summary for post '" + p.id + "'");
        used.emplace(p.id, it->second);
      }
      const auto scores = summarize::score_by_subreddit(questions, used, baseline, c.rouge);
      io::write_file(artifact("summary_scores.csv"), summarize::scores_csv(scores));
      io::write_file(artifact("summaries.jsonl"), summarize::summaries_jsonl(used));
      break;
    }
    case Stage::embed: {
      const auto posts = load_clean(*this);
      const auto labels = load_question_labels(*this);
      const auto questions = qdetect::filter_question_posts(posts, labels);
      const auto summaries = summarize::summaries_from_jsonl(io::read_file(artifact("summaries.jsonl")));
      const auto passages = passage::build_passages(questions, summaries, labels);
      io::write_file(artifact("passages.jsonl"), passage::passages_jsonl(passages));
      const auto ids = ids_of(passages);

      passage::EmbeddingMatrix embeddings;
      const bool configured = !c.embeddings.empty();
      const bool present = configured && fs::exists(c.embeddings) && fs::exists(c.embeddings_manifest);
      if (present) {
        embeddings = passage::import_embeddings(c.embeddings, c.embeddings_manifest, ids);
        if (embeddings.metric == Metric::cosine) passage::normalize_rows(embeddings.values);
      } else if (c.embedding_fallback) {
        if (configured)
          std::cerr << "warning: embeddings " << c.embeddings.string() << " not found; using hashing fallback\n";
        embeddings = passage::hash_embed(passages, c.embedding_dim, c.seed);
      } else {
        throw DataError(configured ? "embeddings " + c.embeddings.string() + " or its manifest not found and fallback disabled"
                                   : "no embeddings configured and fallback disabled");
      }
      passage::export_embeddings(embeddings, artifact("embeddings.f32"), artifact("embeddings.manifest.json"));
      break;
    }
    case Stage::reduce: {
      const auto passages = load_passages(*this);
      const auto ids = ids_of(passages);
      const auto embeddings =
          passage::import_embeddings(artifact("embeddings.f32"), artifact("embeddings.manifest.json"), ids);
      umap::UmapOptions options;
      options.n_neighbors = c.n_neighbors;
      options.metric = c.metric;
      options.out_dim = c.out_dim;
      options.epochs = c.epochs;
      options.neg_samples = c.neg_samples;
      options.min_dist = c.min_dist;
      options.spread = c.spread;
      options.learning_rate = c.learning_rate;
      options.seed = c.seed;
      options.workers = c.workers;
      const auto layout = umap::reduce(embeddings.values, options);
      umap::save_layout(layout, ids, artifact("layout.f32"), artifact("layout.manifest.json"));
      break;
    }
    case Stage::sweep: {
      const auto passages = load_passages(*this);
      const auto points = load_layout_points(*this, ids_of(passages));
      coherence::SweepOptions options;
      options.sizes = c.sweep_sizes;
      options.min_samples = c.min_samples;
      options.top_n = c.coherence_top_n;
      options.include_noise = c.coherence_include_noise;
      options.workers = c.workers;
      const auto result = coherence::sweep(points, passage_tokens(c, passages), options);
      io::write_file(artifact("sweep.csv"), coherence::sweep_csv(result));
      io::write_file(artifact("sweep.json"), coherence::sweep_json(result));
      break;
    }
    case Stage::cluster: {
      const auto passages = load_passages(*this);
      const auto ids = ids_of(passages);
      const auto points = load_layout_points(*this, ids);
      std::size_t size = 0;
      if (c.min_cluster_size) {
        size = *c.min_cluster_size;
      } else {
        const auto sweep = json::parse(io::read_file(artifact("sweep.json")));
        if (sweep.at("selected_min_cluster_size").is_null())
          throw DataError("the sweep found no size with a defined coherence; set cluster.min_cluster_size");
        size = sweep.at("selected_min_cluster_size").get<std::size_t>();
      }
      const auto min_samples = c.min_samples ? c.min_samples : size;
      const auto result = hdbscan::cluster(points, size, min_samples, c.workers);
      io::write_file(artifact("cluster_labels.csv"), hdbscan::labels_csv(ids, result.labels));
      io::write_file(artifact("condensed_tree.json"), result.tree.to_json());
      io::write_file(artifact("cluster.json"), json{{"min_cluster_size", size},
                                                    {"min_samples", min_samples},
                                                    {"n_clusters", result.labels.n_clusters()},
                                                    {"noise", result.labels.noise_count()},
                                                    {"stability", result.labels.stability}}
                                                   .dump(2) +
                                                   "\n");
      break;
    }
    case Stage::topics: {
      const auto passages = load_passages(*this);
      const auto ids = ids_of(passages);
      const auto labels = load_cluster_labels(*this, ids);
      const auto docs = passage_tokens(c, passages);
      const topics::WordEmbedder embed = [&](const std::string& word) {
        return passage::hash_embed_text(word, c.embedding_dim, c.seed);
      };
      topics::TopicOptions options;
      options.keywords = c.keywords;
      options.diversity = c.diversity;
      options.candidates = c.keyword_candidates;
      options.top_words = std::max(c.coherence_top_n, c.keyword_candidates);
      const auto model = topics::build_topics(docs, labels, embed, options);
      const auto rows = topics::topic_table(model, nullptr);
      io::write_file(artifact("topics.json"), topics::topics_json(model));
      io::write_file(artifact("topic_table.csv"), topics::topic_table_csv(rows));
      io::write_file(artifact("topic_table.json"), topics::topic_table_json(rows));

      const auto points = load_layout_points(*this, ids);
      const auto reps = topics::representatives(points, labels, model.topics.size(), c.representatives);
      json reps_json = json::array();
      for (std::size_t t = 0; t < reps.size(); ++t) {
        json members = json::array();
        for (const auto& r : reps[t]) members.push_back({{"post_id", ids[r.index]}, {"distance", r.distance}});
        reps_json.push_back({{"topic_id", t}, {"name", model.topics[t].name}, {"posts", members}});
      }
      io::write_file(artifact("representatives.json"), reps_json.dump(2) + "\n");

      const auto incidence = coherence::labeled_incidence(docs, labels, c.coherence_include_noise);
      const auto report = coherence::topic_coherence(model, incidence, c.coherence_top_n);
      json per_topic = json::array();
      for (const auto& v : report.per_topic) per_topic.push_back(v ? json(*v) : json(nullptr));
      io::write_file(artifact("coherence.json"),
                     json{{"top_n", report.top_n},
                          {"mean_umass", report.mean ? json(*report.mean) : json(nullptr)},
                          {"per_topic", per_topic}}
                             .dump(2) +
                         "\n");
      break;
    }
    case Stage::report: {
      const auto topics_doc = json::parse(io::read_file(artifact("topics.json")));
      topics::TopicModel model;
      model.total = topics_doc.at("total").get<std::size_t>();
      model.noise = topics_doc.at("noise").get<std::size_t>();
      for (const auto& t : topics_doc.at("topics")) {
        topics::Topic topic;
        topic.id = t.at("topic_id").get<int>();
        topic.name = t.at("name").get<std::string>();
        topic.size = t.at("size").get<std::size_t>();
        topic.percentage = t.at("percentage").get<double>();
        model.topics.push_back(std::move(topic));
      }
      std::optional<topics::GroupMap> groups;
      if (!c.group_map.empty()) groups = topics::load_group_map(c.group_map, model.topics.size());

      const auto rows = topics::topic_table(model, groups ? &*groups : nullptr);
      io::write_file(artifact("reports/topic_distribution.csv"), topics::topic_table_csv(rows));
      io::write_file(artifact("reports/topic_distribution.json"), topics::topic_table_json(rows));

      std::vector<topics::TopicRow> top(rows.begin(), rows.end() - 1);
      std::stable_sort(top.begin(), top.end(),
                       [](const topics::TopicRow& a, const topics::TopicRow& b) { return a.size > b.size; });
      if (top.size() > 20) top.resize(20);
      io::write_file(artifact("reports/top20_topics.csv"), topics::topic_table_csv(top));
      io::write_file(artifact("reports/top20_topics.json"), topics::topic_table_json(top));

      if (groups) {
        const auto group_rows = topics::group_table(model, *groups);
        io::write_file(artifact("reports/group_distribution.csv"), topics::group_table_csv(group_rows));
        io::write_file(artifact("reports/group_distribution.json"), topics::group_table_json(group_rows));
      }
      copy_artifact(*this, "question_positions.csv", "reports/question_positions.csv");
      copy_artifact(*this, "question_stats.json", "reports/question_stats.json");
      copy_artifact(*this, "sweep.csv", "reports/sweep.csv");
      copy_artifact(*this, "sweep.json", "reports/sweep.json");
      if (!c.summaries.empty()) copy_artifact(*this, "summary_scores.csv", "reports/summary_scores.csv");
      io::write_file(artifact("reports/macro_stats.csv"), ingest::macro_stats_csv(ingest::corpus_stats(load_clean(*this))));
      break;
    }
  }
}

}  // namespace qforge::pipeline
