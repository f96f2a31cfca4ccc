#include "qforge/config.hpp"

#include "qforge/io.hpp"

#include <charconv>
#include <functional>

namespace qforge {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': bad number '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(parse_number<std::size_t>(key, trim(std::string_view(text).substr(pos, comma - pos))));
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (auto s : sizes) out += (out.empty() ? "" : ",") + std::to_string(s);
  return out;
}

std::string render_bool(bool b) { return b ? "true" : "false"; }

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value, const fs::path& base)>;

fs::path resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return {};
  fs::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

template <typename T>
Setter number(T PipelineConfig::*field) {
  return [field](PipelineConfig& c, const std::string& k, const std::string& v, const fs::path&) {
    c.*field = parse_number<T>(k, v);
  };
}

Setter flag(bool PipelineConfig::*field) {
  return [field](PipelineConfig& c, const std::string& k, const std::string& v, const fs::path&) {
    c.*field = parse_bool(k, v);
  };
}

Setter path(fs::path PipelineConfig::*field) {
  return [field](PipelineConfig& c, const std::string&, const std::string& v, const fs::path& base) {
    c.*field = resolve(base, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", number(&PipelineConfig::seed)},
      {"input", path(&PipelineConfig::input)},
      {"output_dir", path(&PipelineConfig::output_dir)},
      {"resources", path(&PipelineConfig::resources)},
      {"workers", number(&PipelineConfig::workers)},
      {"resume", flag(&PipelineConfig::resume)},
      {"normalize.drop_pronouns", flag(&PipelineConfig::drop_pronouns)},
      {"normalize.spelling_ratio", number(&PipelineConfig::spelling_ratio)},
      {"normalize.spelling_max_edit",
       [](PipelineConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         if (v == "auto")
           c.spelling_max_edit.reset();
         else
           c.spelling_max_edit = parse_number<std::size_t>(k, v);
       }},
      {"detect.engine",
       [](PipelineConfig& c, const std::string&, const std::string& v, const fs::path&) {
         c.detector = qdetect::parse_engine(v);
       }},
      {"detect.scores", path(&PipelineConfig::question_scores)},
      {"detect.threshold", number(&PipelineConfig::question_threshold)},
      {"summarize.external", path(&PipelineConfig::summaries)},
      {"summarize.max_tokens", number(&PipelineConfig::summary_max_tokens)},
      {"summarize.rouge",
       [](PipelineConfig& c, const std::string&, const std::string& v, const fs::path&) {
         c.rouge = summarize::parse_rouge_variant(v);
       }},
      {"embed.payload", path(&PipelineConfig::embeddings)},
      {"embed.manifest", path(&PipelineConfig::embeddings_manifest)},
      {"embed.fallback", flag(&PipelineConfig::embedding_fallback)},
      {"embed.dim", number(&PipelineConfig::embedding_dim)},
      {"umap.n_neighbors", number(&PipelineConfig::n_neighbors)},
      {"umap.metric",
       [](PipelineConfig& c, const std::string&, const std::string& v, const fs::path&) {
         c.metric = parse_metric(v);
       }},
      {"umap.out_dim", number(&PipelineConfig::out_dim)},
      {"umap.epochs", number(&PipelineConfig::epochs)},
      {"umap.neg_samples", number(&PipelineConfig::neg_samples)},
      {"umap.min_dist", number(&PipelineConfig::min_dist)},
      {"umap.spread", number(&PipelineConfig::spread)},
      {"umap.learning_rate", number(&PipelineConfig::learning_rate)},
      {"sweep.sizes",
       [](PipelineConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.sweep_sizes = parse_sizes(k, v);
       }},
      {"sweep.top_n", number(&PipelineConfig::coherence_top_n)},
      {"sweep.include_noise", flag(&PipelineConfig::coherence_include_noise)},
      {"cluster.min_cluster_size",
       [](PipelineConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         if (v == "auto")
           c.min_cluster_size.reset();
         else
           c.min_cluster_size = parse_number<std::size_t>(k, v);
       }},
      {"cluster.min_samples", number(&PipelineConfig::min_samples)},
      {"topics.keywords", number(&PipelineConfig::keywords)},
      {"topics.diversity", number(&PipelineConfig::diversity)},
      {"topics.candidates", number(&PipelineConfig::keyword_candidates)},
      {"topics.remove_stopwords", flag(&PipelineConfig::remove_stopwords)},
      {"topics.extra_stopwords", path(&PipelineConfig::extra_stopwords)},
      {"topics.min_token_length", number(&PipelineConfig::min_token_length)},
      {"topics.representatives", number(&PipelineConfig::representatives)},
      {"report.group_map", path(&PipelineConfig::group_map)},
  };
  return table;
}

std::map<std::string, std::string> render(const PipelineConfig& c) {
  auto num = [](auto v) { return io::format_double(static_cast<double>(v)); };
  return {
      {"seed", std::to_string(c.seed)},
      {"input", c.input.string()},
      {"output_dir", c.output_dir.string()},
      {"resources", c.resources.string()},
      {"workers", std::to_string(c.workers)},
      {"resume", render_bool(c.resume)},
      {"normalize.drop_pronouns", render_bool(c.drop_pronouns)},
      {"normalize.spelling_ratio", num(c.spelling_ratio)},
      {"normalize.spelling_max_edit", c.spelling_max_edit ? std::to_string(*c.spelling_max_edit) : "auto"},
      {"detect.engine", qdetect::to_string(c.detector)},
      {"detect.scores", c.question_scores.string()},
      {"detect.threshold", num(c.question_threshold)},
      {"summarize.external", c.summaries.string()},
      {"summarize.max_tokens", std::to_string(c.summary_max_tokens)},
      {"summarize.rouge", c.rouge == summarize::RougeVariant::l ? "l" : "1"},
      {"embed.payload", c.embeddings.string()},
      {"embed.manifest", c.embeddings_manifest.string()},
      {"embed.fallback", render_bool(c.embedding_fallback)},
      {"embed.dim", std::to_string(c.embedding_dim)},
      {"umap.n_neighbors", std::to_string(c.n_neighbors)},
      {"umap.metric", to_string(c.metric)},
      {"umap.out_dim", std::to_string(c.out_dim)},
      {"umap.epochs", std::to_string(c.epochs)},
      {"umap.neg_samples", std::to_string(c.neg_samples)},
      {"umap.min_dist", num(c.min_dist)},
      {"umap.spread", num(c.spread)},
      {"umap.learning_rate", num(c.learning_rate)},
      {"sweep.sizes", join_sizes(c.sweep_sizes)},
      {"sweep.top_n", std::to_string(c.coherence_top_n)},
      {"sweep.include_noise", render_bool(c.coherence_include_noise)},
      {"cluster.min_cluster_size", c.min_cluster_size ? std::to_string(*c.min_cluster_size) : "auto"},
      {"cluster.min_samples", std::to_string(c.min_samples)},
      {"topics.keywords", std::to_string(c.keywords)},
      {"topics.diversity", num(c.diversity)},
      {"topics.candidates", std::to_string(c.keyword_candidates)},
      {"topics.remove_stopwords", render_bool(c.remove_stopwords)},
      {"topics.extra_stopwords", c.extra_stopwords.string()},
      {"topics.min_token_length", std::to_string(c.min_token_length)},
      {"topics.representatives", std::to_string(c.representatives)},
      {"report.group_map", c.group_map.string()},
  };
}

void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(!c.input.empty(), "config: 'input' is required");
  require(!c.output_dir.empty(), "config: 'output_dir' is required");
  require(fs::exists(c.input), "config: input file " + c.input.string() + " does not exist");
  require(fs::is_directory(c.resources), "config: resource directory " + c.resources.string() + " does not exist");
  require(c.workers >= 1, "config: workers must be >= 1");
  require(c.spelling_ratio > 0, "config: normalize.spelling_ratio must be positive");
  require(c.detector != qdetect::Engine::external || !c.question_scores.empty(),
          "config: detect.engine=external needs detect.scores");
  require(c.question_threshold >= 0 && c.question_threshold <= 1, "config: detect.threshold must lie in [0, 1]");
  require(c.summary_max_tokens >= 1, "config: summarize.max_tokens must be positive");
  require(c.embeddings.empty() == c.embeddings_manifest.empty(),
          "config: embed.payload and embed.manifest go together");
  require(c.embedding_dim >= 8, "config: embed.dim must be >= 8");
  require(c.n_neighbors >= 2, "config: umap.n_neighbors must be >= 2");
  require(c.out_dim >= 1, "config: umap.out_dim must be >= 1");
  require(c.epochs >= 1, "config: umap.epochs must be >= 1");
  require(c.min_dist >= 0 && c.spread > 0 && c.min_dist < c.spread, "config: need 0 <= umap.min_dist < umap.spread");
  require(c.learning_rate > 0, "config: umap.learning_rate must be positive");
  for (auto s : c.sweep_sizes) require(s >= 2, "config: sweep sizes must be >= 2");
  require(!c.min_cluster_size || *c.min_cluster_size >= 2, "config: cluster.min_cluster_size must be >= 2");
  require(c.coherence_top_n >= 2, "config: sweep.top_n must be >= 2");
  require(c.keywords >= 1, "config: topics.keywords must be >= 1");
  require(c.diversity >= 0 && c.diversity <= 1, "config: topics.diversity must lie in [0, 1]");
  require(c.keyword_candidates >= c.keywords, "config: topics.candidates must be >= topics.keywords");
  require(c.representatives >= 1, "config: topics.representatives must be >= 1");
}

}  // namespace

void PipelineConfig::finalize() {
  validate(*this);
  values = render(*this);
}

std::string PipelineConfig::value(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw Error("config: no value for '" + key + "'");
  return it->second;
}

std::string PipelineConfig::hash() const {
  std::string canonical;
  for (const auto& [k, v] : values) {
    if (k == "output_dir" || k == "workers" || k == "resume") continue;
    canonical += k + "=" + v + "\n";
  }
  return io::hex64(io::fnv1a64(canonical));
}

PipelineConfig parse_config(std::string_view content, const fs::path& base_dir) {
  PipelineConfig config;
  config.resources = QFORGE_RESOURCE_DIR;
  bool have_seed = false;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string line(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (auto [prev, fresh] = seen.emplace(key, line_no); !fresh)
      throw ConfigError(where + "key '" + key + "' already set on line " + std::to_string(prev->second));
    try {
      it->second(config, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    } catch (const Error& e) {
      throw ConfigError(where + "key '" + key + "': " + e.what());
    }
    if (key == "seed") have_seed = true;
  }
  if (!have_seed) throw ConfigError("config: 'seed' is required");
  config.finalize();
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  std::string content;
  try {
    content = io::read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config(content, base);
}

}  // namespace qforge
