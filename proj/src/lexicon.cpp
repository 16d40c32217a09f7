#include "fnkit/lexicon.hpp"

#include "fnkit/error.hpp"
#include "fnkit/text_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fnkit {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (line.ends_with('\r')) line.remove_suffix(1);
    out.push_back(line);
    pos = end + 1;
  }
  return out;
}

std::vector<std::string> fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > b) out.emplace_back(line.substr(b, i - b));
  }
  return out;
}

double parse_double(std::string_view s, std::string_view what) {
  const std::string owned(s);
  char* end = nullptr;
  const double v = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size() || !std::isfinite(v)) {
    fail(ErrorKind::InvalidInput, "bad number in " + std::string(what) + ": " + owned);
  }
  return v;
}

void insert_sorted_unique(std::vector<std::size_t>& v, std::size_t x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace

bool Lexicon::has_category(std::string_view category) const {
  return category_ids_.contains(std::string(category));
}

std::size_t Lexicon::category_index(std::string_view category) const {
  auto it = category_ids_.find(std::string(category));
  if (it == category_ids_.end()) {
    fail(ErrorKind::CategoryError, "unknown category '" + std::string(category) + "' in lexicon " + name_);
  }
  return it->second;
}

void Lexicon::add_category(const std::string& category) {
  if (category.empty()) fail(ErrorKind::InvalidInput, "empty category name");
  if (category_ids_.contains(category)) return;
  category_ids_.emplace(category, categories_.size());
  categories_.push_back(category);
}

void Lexicon::add_pattern(std::string_view raw, std::string_view category) {
  const std::size_t id = category_index(category);
  std::string pattern = text::to_lower(text::trim(raw));
  if (pattern.empty()) return;
  if (pattern.ends_with('*')) {
    pattern.pop_back();
    if (pattern.empty()) fail(ErrorKind::InvalidInput, "bare wildcard pattern");
    max_stem_ = std::max(max_stem_, pattern.size());
    insert_sorted_unique(stems_[pattern], id);
  } else {
    insert_sorted_unique(literals_[pattern], id);
  }
}

std::vector<std::size_t> Lexicon::categories_of(std::string_view token) const {
  const std::string t = text::to_lower(token);
  std::vector<std::size_t> out;
  if (auto it = literals_.find(t); it != literals_.end()) out = it->second;
  const std::size_t limit = std::min(t.size(), max_stem_);
  std::string prefix;
  prefix.reserve(limit);
  for (std::size_t n = 1; n <= limit; ++n) {
    prefix.push_back(t[n - 1]);
    if (auto it = stems_.find(prefix); it != stems_.end()) {
      for (auto id : it->second) insert_sorted_unique(out, id);
    }
  }
  return out;
}

bool Lexicon::matches(std::string_view token, std::size_t category) const {
  const auto cats = categories_of(token);
  return std::binary_search(cats.begin(), cats.end(), category);
}

std::vector<std::string> Lexicon::literal_words() const {
  std::vector<std::string> out;
  out.reserve(literals_.size());
  for (const auto& [w, _] : literals_) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Lexicon::stems() const {
  std::vector<std::string> out;
  out.reserve(stems_.size());
  for (const auto& [w, _] : stems_) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

Lexicon parse_liwc_dictionary(std::string_view text, std::string name) {
  Lexicon lex(std::move(name));
  std::unordered_map<std::string, std::string> id_to_name;
  int section = 0;  // 0 before first %, 1 categories, 2 entries, 3 composites
  for (auto raw : lines_of(text)) {
    const std::string line = text::trim(raw);
    if (line.empty()) continue;
    if (line == "%") {
      ++section;
      if (section > 3) fail(ErrorKind::InvalidInput, "too many % sections in dictionary");
      continue;
    }
    const auto f = fields(line);
    if (section == 0) fail(ErrorKind::InvalidInput, "dictionary must start with %");
    if (section == 1) {
      if (f.size() < 2) fail(ErrorKind::InvalidInput, "bad category line: " + line);
      id_to_name[f[0]] = f[1];
      lex.add_category(f[1]);
    } else if (section == 2) {
      if (f.size() < 2) fail(ErrorKind::InvalidInput, "entry without categories: " + line);
      for (std::size_t i = 1; i < f.size(); ++i) {
        auto it = id_to_name.find(f[i]);
        if (it == id_to_name.end()) fail(ErrorKind::CategoryError, "undeclared category id " + f[i]);
        lex.add_pattern(f[0], it->second);
      }
    } else {
      if (f.size() < 2) fail(ErrorKind::InvalidInput, "bad composite line: " + line);
      CompositeScore c;
      c.name = f[0];
      c.intercept = parse_double(f[1], "composite intercept");
      for (std::size_t i = 2; i < f.size(); ++i) {
        const auto colon = f[i].rfind(':');
        if (colon == std::string::npos) fail(ErrorKind::InvalidInput, "bad composite weight: " + f[i]);
        const std::string cat = f[i].substr(0, colon);
        lex.category_index(cat);
        c.weights.emplace_back(cat, parse_double(std::string_view(f[i]).substr(colon + 1), "composite weight"));
      }
      lex.composites.push_back(std::move(c));
    }
  }
  if (section < 2) fail(ErrorKind::InvalidInput, "dictionary has no entry section");
  if (lex.categories().empty()) fail(ErrorKind::InvalidInput, "dictionary declares no categories");
  return lex;
}

Lexicon load_liwc_dictionary(const std::string& path) {
  return parse_liwc_dictionary(read_file(path), std::filesystem::path(path).stem().string());
}

std::vector<std::string> read_word_list(const std::string& path) {
  std::vector<std::string> out;
  const std::string content = read_file(path);
  for (auto raw : lines_of(content)) {
    const std::string w = text::to_lower(text::trim(raw));
    if (w.empty() || w.starts_with('#')) continue;
    out.push_back(w);
  }
  return out;
}

Lexicon load_word_list_dir(const std::string& dir, std::string name, const std::vector<std::string>& order) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorKind::Io, "not a directory: " + dir);
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.emplace(entry.path().stem().string(), entry.path());
    }
  }
  std::vector<std::string> cats = order;
  if (cats.empty()) {
    for (const auto& [stem, _] : files) cats.push_back(stem);
  }
  Lexicon lex(std::move(name));
  for (const auto& cat : cats) {
    auto it = files.find(cat);
    if (it == files.end()) fail(ErrorKind::Io, "missing word list " + cat + " in " + dir);
    lex.add_category(cat);
    for (const auto& w : read_word_list(it->second.string())) lex.add_pattern(w, cat);
  }
  return lex;
}

std::size_t lexicon_hits(std::span<const std::string_view> tokens, const Lexicon& lexicon, std::string_view category) {
  const std::size_t id = lexicon.category_index(category);
  std::size_t n = 0;
  for (auto t : tokens) {
    if (lexicon.matches(t, id)) ++n;
  }
  return n;
}

std::size_t lexicon_hits(std::span<const std::string> tokens, const Lexicon& lexicon, std::string_view category) {
  std::vector<std::string_view> views(tokens.begin(), tokens.end());
  return lexicon_hits(std::span<const std::string_view>(views), lexicon, category);
}

void ValenceLexicon::set(std::string_view word, double score) {
  if (!std::isfinite(score)) fail(ErrorKind::InvalidInput, "non-finite valence for " + std::string(word));
  scores_[text::to_lower(word)] = score;
}

std::optional<double> ValenceLexicon::score(std::string_view token) const {
  auto it = scores_.find(text::to_lower(token));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ValenceLexicon::words() const {
  std::vector<std::string> out;
  out.reserve(scores_.size());
  for (const auto& [w, _] : scores_) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

ValenceLexicon parse_valence_lexicon(std::string_view text) {
  ValenceLexicon lex;
  for (auto raw : lines_of(text)) {
    if (text::trim(raw).empty() || raw.starts_with('#')) continue;
    const auto tab = raw.find('\t');
    if (tab == std::string_view::npos) fail(ErrorKind::InvalidInput, "valence line without tab: " + std::string(raw));
    auto rest = raw.substr(tab + 1);
    const auto tab2 = rest.find('\t');
    if (tab2 != std::string_view::npos) rest = rest.substr(0, tab2);
    lex.set(text::trim(raw.substr(0, tab)), parse_double(text::trim(rest), "valence score"));
  }
  return lex;
}

ValenceLexicon load_valence_lexicon(const std::string& path) { return parse_valence_lexicon(read_file(path)); }

ValenceScores valence_scores(std::span<const std::string_view> tokens, const ValenceLexicon& lexicon) {
  if (tokens.empty()) return {0.0, 1.0, 0.0};
  std::size_t neg = 0;
  std::size_t pos = 0;
  for (auto t : tokens) {
    const auto s = lexicon.score(t);
    if (!s) continue;
    if (*s < -kValenceThreshold) {
      ++neg;
    } else if (*s > kValenceThreshold) {
      ++pos;
    }
  }
  const auto n = static_cast<double>(tokens.size());
  const std::size_t neu = tokens.size() - neg - pos;
  ValenceScores v{static_cast<double>(neg) / n, static_cast<double>(neu) / n, static_cast<double>(pos) / n};
  // Nudge the neutral share by ulps so the three proportions sum to exactly 1.
  for (int i = 0; i < 8 && v.neg + v.neu + v.pos != 1.0; ++i) {
    v.neu = std::nextafter(v.neu, v.neg + v.neu + v.pos > 1.0 ? 0.0 : 2.0);
  }
  return v;
}

ValenceScores valence_scores(std::span<const std::string> tokens, const ValenceLexicon& lexicon) {
  std::vector<std::string_view> views(tokens.begin(), tokens.end());
  return valence_scores(std::span<const std::string_view>(views), lexicon);
}

double valence_compound(std::span<const std::string_view> tokens, const ValenceLexicon& lexicon) {
  double sum = 0.0;
  for (auto t : tokens) {
    if (auto s = lexicon.score(t)) sum += *s;
  }
  if (sum == 0.0) return 0.0;
  return sum / std::sqrt(sum * sum + 15.0);
}

TextCounts text_counts(const TokenStream& stream) {
  TextCounts c;
  c.sentences = stream.sentences.size();
  std::unordered_set<std::string> seen;
  for (const auto& tok : stream.tokens) {
    if (!tok.is_word) continue;
    ++c.words;
    const std::size_t syl = token_syllables(tok.text);
    c.syllables += syl;
    if (syl >= 3) ++c.polysyllables;
    c.letters += text::letter_count(tok.text);
    std::size_t chars = 0;
    for (std::size_t pos = 0; pos < tok.text.size(); ++chars) text::next_codepoint(tok.text, pos);
    if (chars > 6) ++c.long_words;
    seen.insert(text::to_lower(tok.text));
  }
  c.unique_words = seen.size();
  return c;
}

Readability readability(const TextCounts& c) {
  if (c.words == 0) fail(ErrorKind::DegenerateText, "no words");
  if (c.sentences == 0) fail(ErrorKind::DegenerateText, "no sentences");
  const double w = static_cast<double>(c.words);
  const double s = static_cast<double>(c.sentences);
  Readability r;
  r.flesch_kincaid_grade = 0.39 * (w / s) + 11.8 * (static_cast<double>(c.syllables) / w) - 15.59;
  r.smog = 1.0430 * std::sqrt(static_cast<double>(c.polysyllables) * 30.0 / s) + 3.1291;
  const double L = static_cast<double>(c.letters) / w * 100.0;
  const double S = s / w * 100.0;
  r.coleman_liau = 0.0588 * L - 0.296 * S - 15.8;
  r.lix = w / s + 100.0 * static_cast<double>(c.long_words) / w;
  r.ttr = static_cast<double>(c.unique_words) / w;
  r.avg_wordlen = static_cast<double>(c.letters) / w;
  return r;
}

namespace {

template <typename Fn>
void for_each_entity_run(const TokenStream& stream, Fn&& on_run) {
  for (const auto& [begin, end] : stream.sentences) {
    bool first_word = true;
    std::size_t run = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& tok = stream.tokens[i];
      if (!tok.is_word) {
        if (run) on_run(run);
        run = 0;
        continue;
      }
      const bool initial = first_word;
      first_word = false;
      if (!initial && text::is_capitalised(tok.text) && tok.text != "I") {
        ++run;
      } else {
        if (run) on_run(run);
        run = 0;
      }
    }
    if (run) on_run(run);
  }
}

}  // namespace

std::size_t named_entity_runs(const TokenStream& stream) {
  std::size_t n = 0;
  for_each_entity_run(stream, [&n](std::size_t) { ++n; });
  return n;
}

std::size_t named_entity_tokens(const TokenStream& stream) {
  std::size_t n = 0;
  for_each_entity_run(stream, [&n](std::size_t len) { n += len; });
  return n;
}

}  // namespace fnkit
