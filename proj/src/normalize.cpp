#include "qforge/normalize.hpp"

#include "qforge/common.hpp"
#include "qforge/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace qforge::normalize {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string fold_quotes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80) {
      const auto c = static_cast<unsigned char>(text[i + 2]);
      if (c == 0x98 || c == 0x99) {
        out += '\'';
        i += 2;
        continue;
      }
      if (c == 0x9C || c == 0x9D) {
        out += '"';
        i += 2;
        continue;
      }
    }
    out += text[i];
  }
  return out;
}

template <typename Fn>
void for_each_chunk(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) fn(text.substr(start, i - start));
  }
}

void emit_chunk(std::string_view chunk, Tokens& out) {
  std::size_t begin = 0;
  while (begin < chunk.size() && is_punct(chunk[begin])) out.emplace_back(1, chunk[begin++]);
  std::size_t tail = chunk.size();
  while (tail > begin && is_punct(chunk[tail - 1])) --tail;
  const auto core = chunk.substr(begin, tail - begin);
  if (!core.empty()) {
    const auto pos = core.find_first_of("?!");
    if (pos == std::string_view::npos) {
      out.emplace_back(core);
    } else {
      emit_chunk(core.substr(0, pos), out);
      out.emplace_back(1, core[pos]);
      emit_chunk(core.substr(pos + 1), out);
    }
  }
  for (std::size_t i = tail; i < chunk.size(); ++i) out.emplace_back(1, chunk[i]);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_alpha_token(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool is_closer(std::string_view token) {
  return token == "\"" || token == "'" || token == ")" || token == "]";
}

}  // namespace

Tokens tokenize(std::string_view text) {
  const std::string folded = lower(fold_quotes(text));
  Tokens tokens;
  for_each_chunk(folded, [&](std::string_view chunk) { emit_chunk(chunk, tokens); });
  return tokens;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

bool is_punctuation_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), is_punct);
}

bool is_terminator_token(std::string_view token) {
  return token == "." || token == "?" || token == "!";
}

const std::vector<std::string>& personal_pronouns() {
  static const std::vector<std::string> list = {
      "i",    "me",     "my",   "mine", "myself", "you",   "your",  "yours",     "yourself",
      "yourselves",     "he",   "him",  "his",    "himself", "she",  "her",    "hers",
      "herself",        "it",   "its",  "itself", "we",    "us",    "our",       "ours",
      "ourselves",      "they", "them", "their",  "theirs", "themselves"};
  return list;
}

std::string strip_entities(std::string_view text, bool drop_pronouns) {
  static const std::unordered_set<std::string> pronouns(personal_pronouns().begin(),
                                                        personal_pronouns().end());
  const std::string folded = fold_quotes(text);
  std::string out;
  auto keep = [&](std::string_view piece) {
    if (piece.empty()) return;
    if (!out.empty()) out += ' ';
    out += piece;
  };
  for_each_chunk(folded, [&](std::string_view chunk) {
    std::size_t b = 0, e = chunk.size();
    while (b < e && is_punct(chunk[b])) ++b;
    while (e > b && is_punct(chunk[e - 1])) --e;
    const std::string inner = lower(chunk.substr(b, e - b));
    if (inner.find("://") != std::string::npos || inner.rfind("www.", 0) == 0) return;
    const auto at = inner.find('@');
    if (at != std::string::npos && at > 0 && inner.find('@', at + 1) == std::string::npos) {
      const auto domain = std::string_view(inner).substr(at + 1);
      const auto dot = domain.rfind('.');
      if (dot != std::string_view::npos && dot > 0 && dot + 1 < domain.size()) return;
    }
    if (drop_pronouns && !inner.empty() && pronouns.contains(inner)) {
      keep(chunk.substr(0, b));
      keep(chunk.substr(e));
      return;
    }
    keep(chunk);
  });
  return out;
}

Lexicon Lexicon::parse_tsv(std::string_view content, const std::string& origin) {
  Lexicon lexicon;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size())
      throw DataError(origin + ": line " + std::to_string(line_no) + ": expected token<TAB>expansion");
    lexicon.add(std::string(line.substr(0, tab)), line.substr(tab + 1));
    if (end == content.size()) break;
  }
  return lexicon;
}

Lexicon Lexicon::load_tsv(const std::filesystem::path& path) {
  return parse_tsv(io::read_file(path), path.string());
}

void Lexicon::add(std::string key, std::string_view expansion) {
  entries_[lower(fold_quotes(key))] = tokenize(expansion);
}

const Tokens* Lexicon::find(std::string_view token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

Tokens expand_pass(std::span<const std::string> tokens, const Lexicon& lexicon, int apostrophe_pass) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const bool has_apostrophe = t.find('\'') != std::string::npos;
    const bool eligible = apostrophe_pass < 0 || has_apostrophe == (apostrophe_pass == 1);
    const Tokens* expansion = eligible ? lexicon.find(t) : nullptr;
    if (expansion) {
      out.insert(out.end(), expansion->begin(), expansion->end());
    } else {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace

Tokens expand_contractions(std::span<const std::string> tokens, const Lexicon& contractions) {
  const Tokens first = expand_pass(tokens, contractions, 1);
  return expand_pass(first, contractions, 0);
}

Tokens expand_abbreviations(std::span<const std::string> tokens, const Lexicon& abbreviations) {
  return expand_pass(tokens, abbreviations, -1);
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::contraction: return "contraction";
    case Provenance::abbreviation: return "abbreviation";
    case Provenance::spelling: return "spelling";
  }
  return "spelling";
}

void CorrectionTable::add(std::string token, Correction correction) {
  entries_[std::move(token)] = std::move(correction);
}

const Correction* CorrectionTable::find(std::string_view token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

Tokens CorrectionTable::apply(std::span<const std::string> tokens) const {
  Tokens out(tokens.begin(), tokens.end());
  for (auto& t : out) {
    const Correction* c = find(t);
    if (c && c->provenance == Provenance::spelling) t = c->replacement;
  }
  return out;
}

std::string CorrectionTable::to_tsv() const {
  std::string out = "token\treplacement\tprovenance\n";
  for (const auto& [token, c] : entries_) out += token + "\t" + c.replacement + "\t" + to_string(c.provenance) + "\n";
  return out;
}

CorrectionTable CorrectionTable::from_tsv(std::string_view content) {
  CorrectionTable table;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw DataError("correction table: malformed row '" + std::string(line) + "'");
    const auto prov = line.substr(t2 + 1);
    Provenance p = Provenance::spelling;
    if (prov == "contraction") p = Provenance::contraction;
    else if (prov == "abbreviation") p = Provenance::abbreviation;
    else if (prov != "spelling") throw DataError("correction table: unknown provenance '" + std::string(prov) + "'");
    table.add(std::string(line.substr(0, t1)), {std::string(line.substr(t1 + 1, t2 - t1 - 1)), p});
  }
  return table;
}

void CorrectionTable::add_lexicon(const Lexicon& lexicon, Provenance provenance) {
  for (const auto& [key, expansion] : lexicon.entries())
    if (!entries_.contains(key)) entries_[key] = {detokenize(expansion), provenance};
}

std::size_t SpellingOptions::edit_budget(std::size_t token_length) const {
  if (max_edit_distance) return *max_edit_distance;
  return token_length <= short_token_length ? 1 : 2;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

// All strings reachable from `word` by deleting up to `depth` characters.
void deletes(const std::string& word, std::size_t depth, std::unordered_set<std::string>& out) {
  out.insert(word);
  std::vector<std::string> frontier{word};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::string> next;
    for (const auto& w : frontier)
      for (std::size_t i = 0; i < w.size(); ++i) {
        std::string shorter = w.substr(0, i) + w.substr(i + 1);
        if (out.insert(shorter).second) next.push_back(std::move(shorter));
      }
    frontier = std::move(next);
  }
}

}  // namespace

CorrectionTable build_spelling_table(const TokenCounts& counts, const SpellingOptions& options) {
  CorrectionTable table;
  if (counts.empty()) return table;

  // Any candidate must have count >= ratio * 1.
  std::vector<const std::pair<const std::string, std::size_t>*> candidates;
  for (const auto& entry : counts)
    if (is_alpha_token(entry.first) && static_cast<double>(entry.second) >= options.min_freq_ratio)
      candidates.push_back(&entry);

  std::size_t max_budget = options.max_edit_distance.value_or(2);
  std::unordered_map<std::string, std::vector<std::uint32_t>> index;
  for (std::uint32_t ci = 0; ci < candidates.size(); ++ci) {
    std::unordered_set<std::string> variants;
    deletes(candidates[ci]->first, max_budget, variants);
    for (const auto& v : variants) index[v].push_back(ci);
  }

  std::map<std::string, std::string> raw;
  for (const auto& [token, count] : counts) {
    if (count == 0 || count >= options.min_candidate_count) continue;
    if (token.size() < options.min_token_length || !is_alpha_token(token)) continue;
    const std::size_t budget = options.edit_budget(token.size());
    std::unordered_set<std::string> variants;
    deletes(token, budget, variants);
    std::set<std::uint32_t> pool;
    for (const auto& v : variants) {
      auto it = index.find(v);
      if (it != index.end()) pool.insert(it->second.begin(), it->second.end());
    }
    const std::pair<const std::string, std::size_t>* best = nullptr;
    for (std::uint32_t ci : pool) {
      const auto* cand = candidates[ci];
      if (cand->first == token) continue;
      if (static_cast<double>(cand->second) < options.min_freq_ratio * static_cast<double>(count)) continue;
      if (edit_distance(token, cand->first) > budget) continue;
      if (!best || cand->second > best->second || (cand->second == best->second && cand->first < best->first))
        best = cand;
    }
    if (best) raw[token] = best->first;
  }

  for (const auto& [token, target] : raw) {
    std::string final_target = target;
    std::set<std::string> visited{token};
    bool cycle = false;
    for (auto it = raw.find(final_target); it != raw.end(); it = raw.find(final_target)) {
      if (!visited.insert(final_target).second) {
        cycle = true;
        break;
      }
      final_target = it->second;
    }
    if (!cycle && final_target != token) table.add(token, {final_target, Provenance::spelling});
  }
  return table;
}

namespace {

bool is_unit_abbreviation(std::string_view word) {
  static const std::unordered_set<std::string> units = {"mg", "mcg", "ml"};
  return units.contains(lower(word));
}

bool is_number(std::string_view word) {
  bool digit = false;
  for (char c : word) {
    if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
    else if (c != '.' && c != ',') return false;
  }
  return digit;
}

bool closes_open(std::string_view sentence, char closer) {
  if (closer == '"') return std::count(sentence.begin(), sentence.end(), '"') % 2 == 1;
  const char opener = closer == ')' ? '(' : closer == ']' ? '[' : 0;
  if (!opener) return false;
  return std::count(sentence.begin(), sentence.end(), opener) > std::count(sentence.begin(), sentence.end(), closer);
}

}  // namespace

bool is_sentence_abbreviation(std::string_view word) {
  static const std::unordered_set<std::string> known = {"e.g", "i.e", "a.m", "p.m", "dr", "mr", "mrs", "ms", "mg",
                                                        "mcg", "ml", "vs", "approx", "prof", "st", "jr",
                                                        "sr"};
  return known.contains(lower(word));
}

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  auto emit = [&](std::size_t from, std::size_t to) {
    while (from < to && is_space(text[from])) ++from;
    while (to > from && is_space(text[to - 1])) --to;
    if (to > from) sentences.emplace_back(text.substr(from, to - from));
  };
  auto is_term = [](char c) { return c == '.' || c == '!' || c == '?'; };

  std::size_t start = 0, i = 0;
  while (i < text.size()) {
    if (!is_term(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::size_t terminators = 0;
    while (true) {
      while (j < text.size() && is_term(text[j])) {
        ++j;
        ++terminators;
      }
      if (j + 1 < text.size() && text[j] == ' ' && is_term(text[j + 1])) {
        ++j;
        continue;
      }
      break;
    }
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']')) ++j;
    // Detached closers that balance an opener earlier in the sentence.
    while (j + 1 < text.size() && text[j] == ' ' && closes_open(text.substr(start, j - start), text[j + 1]) &&
           (j + 2 == text.size() || is_space(text[j + 2])))
      j += 2;
    const bool boundary = j == text.size() || is_space(text[j]);
    bool split = boundary;
    if (split && terminators == 1 && text[i] == '.') {
      std::size_t k = i;
      while (k > start && is_space(text[k - 1])) --k;
      std::size_t w = k;
      while (w > start && !is_space(text[w - 1])) --w;
      if (k > w && is_sentence_abbreviation(text.substr(w, k - w))) {
        // A unit right after a quantity closes the clause ("took 2.5 mg. is that ok").
        std::size_t q = w;
        while (q > start && is_space(text[q - 1])) --q;
        std::size_t p = q;
        while (p > start && !is_space(text[p - 1])) --p;
        const bool quantity = is_unit_abbreviation(text.substr(w, k - w)) && q > p && is_number(text.substr(p, q - p));
        split = quantity;
      }
    }
    if (split) {
      emit(start, j);
      start = j;
    }
    i = j;
  }
  emit(start, text.size());
  return sentences;
}

Lexicons Lexicons::load(const std::filesystem::path& resource_dir) {
  return {Lexicon::load_tsv(resource_dir / "contractions.tsv"),
          Lexicon::load_tsv(resource_dir / "abbreviations.tsv")};
}

Tokens pre_spelling_tokens(std::string_view text, const Lexicons& lexicons, const NormalizeOptions& options) {
  const std::string stripped = strip_entities(text, options.drop_pronouns);
  const Tokens tokens = tokenize(stripped);
  return expand_abbreviations(expand_contractions(tokens, lexicons.contractions), lexicons.abbreviations);
}

TokenCounts count_corpus_tokens(std::span<const RawPost> posts, const Lexicons& lexicons,
                                const NormalizeOptions& options) {
  TokenCounts counts;
  for (const auto& p : posts) {
    for (const std::string* text : {&p.title, &p.selftext})
      for (const auto& t : pre_spelling_tokens(*text, lexicons, options)) ++counts[t];
  }
  return counts;
}

std::string normalize_text(std::string_view text, const CorrectionTable& table, const Lexicons& lexicons,
                           const NormalizeOptions& options, bool terminate) {
  Tokens tokens = table.apply(pre_spelling_tokens(text, lexicons, options));
  if (terminate && !tokens.empty()) {
    auto last = std::find_if(tokens.rbegin(), tokens.rend(), [](const auto& t) { return !is_closer(t); });
    if (last == tokens.rend() || !is_terminator_token(*last)) tokens.emplace_back(".");
  }
  return detokenize(tokens);
}

CleanPost normalize_post(const RawPost& raw, const CorrectionTable& table, const Lexicons& lexicons,
                         const NormalizeOptions& options) {
  CleanPost post;
  post.id = raw.id;
  post.subreddit = raw.subreddit;
  post.raw_text = raw.selftext;
  post.title_norm = normalize_text(raw.title, table, lexicons, options, false);
  post.text_norm = normalize_text(raw.selftext, table, lexicons, options, options.terminate_text);
  post.sentences = segment_sentences(post.text_norm);
  post.tokens = tokenize(post.text_norm);
  return post;
}

std::string clean_posts_jsonl(std::span<const CleanPost> posts) {
  std::string out;
  for (const auto& p : posts)
    out += nlohmann::json{{"id", p.id},
                          {"subreddit", p.subreddit},
                          {"title_norm", p.title_norm},
                          {"text_norm", p.text_norm},
                          {"sentences", p.sentences},
                          {"tokens", p.tokens},
                          {"raw_text", p.raw_text}}
               .dump() +
           "\n";
  return out;
}

std::vector<CleanPost> clean_posts_from_jsonl(std::string_view content) {
  std::vector<CleanPost> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto row = nlohmann::json::parse(line);
      CleanPost p;
      p.id = row.at("id").get<std::string>();
      p.subreddit = row.at("subreddit").get<std::string>();
      p.title_norm = row.at("title_norm").get<std::string>();
      p.text_norm = row.at("text_norm").get<std::string>();
      p.sentences = row.at("sentences").get<std::vector<std::string>>();
      p.tokens = row.at("tokens").get<std::vector<std::string>>();
      p.raw_text = row.at("raw_text").get<std::string>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("clean posts line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qforge::normalize
