#include "fnkit/tokenfeat.hpp"

#include "fnkit/error.hpp"
#include "fnkit/lingcore.hpp"
#include "fnkit/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fnkit {

namespace {

bool is_url_start(std::string_view s, std::size_t i) {
  const auto rest = s.substr(i);
  return rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.");
}

// Blanks out URLs and @handles, keeping byte offsets irrelevant.
std::string strip_urls_and_handles(std::string_view lower) {
  std::string out;
  out.reserve(lower.size());
  std::size_t i = 0;
  while (i < lower.size()) {
    const bool boundary = i == 0 || lower[i - 1] == ' ' || lower[i - 1] == '\n' || lower[i - 1] == '\t' ||
                          lower[i - 1] == '(' || lower[i - 1] == '"';
    if (boundary && (is_url_start(lower, i) || (lower[i] == '@' && i + 1 < lower.size() && lower[i + 1] != ' '))) {
      while (i < lower.size() && lower[i] != ' ' && lower[i] != '\n' && lower[i] != '\t' && lower[i] != '\r') ++i;
      out += ' ';
      continue;
    }
    out += lower[i++];
  }
  return out;
}

std::string lower_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    char32_t cp = text::next_codepoint(s, pos);
    if (cp >= 'A' && cp <= 'Z') cp = cp - 'A' + 'a';
    if (cp == 0x2019) cp = '\'';
    text::append_utf8(out, cp);
  }
  return out;
}

}  // namespace

std::vector<std::string> preprocess_tokens(std::string_view text, const std::unordered_set<std::string>& stopwords) {
  const std::string cleaned = strip_urls_and_handles(lower_utf8(text));
  const TokenStream ts = tokenize(cleaned);
  std::vector<std::string> out;
  for (const auto& tok : ts.tokens) {
    if (!tok.is_word) continue;
    if (stopwords.contains(tok.text)) continue;
    out.push_back(lemmatize(tok.text));
  }
  return out;
}

Vocabulary Vocabulary::fit(std::span<const std::vector<std::string>> docs, std::size_t max_features) {
  if (docs.empty()) fail(ErrorKind::EmptyCorpus, "cannot fit a vocabulary on zero documents");
  if (max_features == 0) fail(ErrorKind::EmptyVocabulary, "max_features must be positive");
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // term -> (total, df)
  for (const auto& doc : docs) {
    std::vector<std::string_view> seen;
    for (const auto& t : doc) {
      auto& s = stats[t];
      ++s.first;
      seen.push_back(t);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto t : seen) ++stats[std::string(t)].second;
  }
  if (stats.empty()) fail(ErrorKind::EmptyVocabulary, "corpus contains no terms");
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(), stats.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
  if (ranked.size() > max_features) ranked.resize(max_features);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Vocabulary v;
  v.n_docs_ = docs.size();
  v.max_features_ = max_features;
  for (auto& [term, s] : ranked) {
    v.terms_.push_back(term);
    v.df_.push_back(s.second);
  }
  v.rebuild_index();
  return v;
}

void Vocabulary::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) fail(ErrorKind::InvalidInput, "duplicate vocabulary term " + terms_[i]);
  }
}

std::size_t Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? static_cast<std::size_t>(-1) : it->second;
}

double Vocabulary::idf(std::size_t index) const {
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_[index]))) + 1.0;
}

std::string Vocabulary::serialise() const {
  std::string out = "# fnkit-vocabulary n_docs=" + std::to_string(n_docs_) + " max_features=" + std::to_string(max_features_) + "\n";
  for (std::size_t i = 0; i < terms_.size(); ++i) out += terms_[i] + "\t" + std::to_string(df_[i]) + "\n";
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Vocabulary v;
  if (!std::getline(in, line) || !line.starts_with("# fnkit-vocabulary")) {
    fail(ErrorKind::SchemaError, "vocabulary file lacks its header line");
  }
  if (std::sscanf(line.c_str(), "# fnkit-vocabulary n_docs=%zu max_features=%zu", &v.n_docs_, &v.max_features_) != 2) {
    fail(ErrorKind::SchemaError, "bad vocabulary header: " + line);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) fail(ErrorKind::SchemaError, "bad vocabulary line: " + line);
    v.terms_.push_back(line.substr(0, tab));
    v.df_.push_back(static_cast<std::size_t>(std::stoull(line.substr(tab + 1))));
  }
  if (v.terms_.empty()) fail(ErrorKind::EmptyVocabulary, "vocabulary file has no terms");
  v.rebuild_index();
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << serialise();
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

double SparseVector::sum() const {
  double s = 0.0;
  for (const auto& [_, v] : entries) s += v;
  return s;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [_, v] : entries) s += v * v;
  return std::sqrt(s);
}

void SparseVector::add_to(std::span<double> dense) const {
  for (const auto& [i, v] : entries) dense[i] += v;
}

SparseVector bow_vector(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens) {
    const auto i = vocab.index_of(t);
    if (i != static_cast<std::size_t>(-1)) counts[i] += 1.0;
  }
  return {{counts.begin(), counts.end()}};
}

SparseVector tfidf_vector(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t corpus_size) {
  SparseVector v = bow_vector(tokens, vocab);
  const auto& df = vocab.document_frequencies();
  for (auto& [i, x] : v.entries) {
    x *= std::log((1.0 + static_cast<double>(corpus_size)) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  const double n = v.norm();
  if (n > 0.0) {
    for (auto& [_, x] : v.entries) x /= n;
  }
  return v;
}

SparseVector tfidf_vector(std::span<const std::string> tokens, const Vocabulary& vocab) {
  return tfidf_vector(tokens, vocab, vocab.n_docs());
}

Matrix to_dense(std::span<const SparseVector> rows, std::size_t dim) {
  Matrix m(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r].add_to(m.row(r));
  return m;
}

}  // namespace fnkit
