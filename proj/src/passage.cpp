#include "qforge/passage.hpp"

#include "qforge/io.hpp"
#include "qforge/normalize.hpp"

#include <json.hpp>

namespace qforge::passage {

using nlohmann::json;

namespace {

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace

std::vector<Passage> build_passages(std::span<const CleanPost> posts, const summarize::SummaryMap& summaries,
                                    const qdetect::LabelSet& labels) {
  std::vector<Passage> out;
  out.reserve(posts.size());
  for (const auto& p : posts) {
    auto it = summaries.find(p.id);
    if (it == summaries.end()) throw DataError("missing summary for post '" + p.id + "'");
    std::string text = p.title_norm + " " + it->second.text;
    for (const auto& q : qdetect::post_questions(p, labels)) text += " " + q;
    out.push_back({p.id, collapse_whitespace(text)});
  }
  return out;
}

std::string passages_jsonl(std::span<const Passage> passages) {
  std::string out;
  for (const auto& p : passages) out += json{{"post_id", p.post_id}, {"text", p.text}}.dump() + "\n";
  return out;
}

std::vector<Passage> passages_from_jsonl(std::string_view content) {
  std::vector<Passage> out;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    const json row = json::parse(line);
    out.push_back({row.at("post_id").get<std::string>(), row.at("text").get<std::string>()});
  }
  return out;
}

EmbeddingMatrix import_embeddings(const std::filesystem::path& payload, const std::filesystem::path& manifest,
                                  std::span<const std::string> expected_ids,
                                  std::optional<std::size_t> expected_dim) {
  json meta;
  try {
    meta = json::parse(io::read_file(manifest));
  } catch (const json::parse_error& e) {
    throw DataError(manifest.string() + ": malformed manifest (" + e.what() + ")");
  }
  const std::string where = manifest.string() + ": ";
  if (!meta.contains("n") || !meta.contains("d") || !meta.contains("ids"))
    throw DataError(where + "manifest needs n, d and ids");
  const auto n = meta["n"].get<std::size_t>();
  const auto d = meta["d"].get<std::size_t>();
  const auto ids = meta["ids"].get<std::vector<std::string>>();
  if (ids.size() != n)
    throw DataError(where + "dimension mismatch: n=" + std::to_string(n) + " but " + std::to_string(ids.size()) +
                    " ids");
  if (d == 0) throw DataError(where + "dimension mismatch: d=0");
  if (n != expected_ids.size())
    throw DataError(where + "dimension mismatch: manifest has " + std::to_string(n) + " rows, expected " +
                    std::to_string(expected_ids.size()));
  for (std::size_t i = 0; i < n; ++i)
    if (ids[i] != expected_ids[i])
      throw DataError(where + "id order mismatch at row " + std::to_string(i) + ": '" + ids[i] + "' vs '" +
                      expected_ids[i] + "'");
  if (expected_dim && *expected_dim != d)
    throw DataError(where + "dimension mismatch: d=" + std::to_string(d) + ", expected " +
                    std::to_string(*expected_dim));

  EmbeddingMatrix m;
  m.ids = ids;
  m.values = io::read_f32(payload, n, d);
  m.model = meta.value("model", "unknown");
  m.metric = parse_metric(meta.value("metric", "cosine"));
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    if (!m.values.row(i).allFinite()) throw DataError(payload.string() + ": non-finite value in row " + std::to_string(i));
  return m;
}

void export_embeddings(const EmbeddingMatrix& embeddings, const std::filesystem::path& payload,
                       const std::filesystem::path& manifest) {
  io::write_f32(payload, embeddings.values);
  json meta = {{"ids", embeddings.ids},
               {"n", embeddings.values.rows()},
               {"d", embeddings.values.cols()},
               {"model", embeddings.model},
               {"metric", to_string(embeddings.metric)},
               {"dtype", "float32le"}};
  io::write_file(manifest, meta.dump(2) + "\n");
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Eigen::VectorXf hash_embed_text(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw ConfigError("hash embedding dimension must be >= 8");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  std::size_t words = 0;
  for (const auto& t : normalize::tokenize(text)) {
    if (normalize::is_punctuation_token(t)) continue;
    ++words;
    const std::uint64_t h = mix(io::fnv1a64(t) ^ mix(seed));
    const auto bucket = static_cast<Eigen::Index>(h % dim);
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  if (words == 0) throw DataError("cannot hash-embed text without word tokens: '" + std::string(text) + "'");
  const double norm = v.norm();
  // Opposite signs in one bucket can cancel out completely.
  if (!(norm > 0)) throw DataError("hash embedding collapsed to the zero vector for '" + std::string(text) + "'");
  return (v / norm).cast<float>();
}

EmbeddingMatrix hash_embed(std::span<const Passage> passages, std::size_t dim, std::uint64_t seed) {
  EmbeddingMatrix m;
  m.model = "hash:" + std::to_string(dim) + ":" + std::to_string(seed);
  m.metric = Metric::cosine;
  m.values.resize(static_cast<Eigen::Index>(passages.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < passages.size(); ++i) {
    m.ids.push_back(passages[i].post_id);
    try {
      m.values.row(static_cast<Eigen::Index>(i)) = hash_embed_text(passages[i].text, dim, seed).transpose();
    } catch (const DataError& e) {
      throw DataError("post '" + passages[i].post_id + "': " + e.what());
    }
  }
  return m;
}

}  // namespace qforge::passage
