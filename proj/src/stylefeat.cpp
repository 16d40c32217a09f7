#include "fnkit/stylefeat.hpp"

#include "fnkit/csv.hpp"
#include "fnkit/error.hpp"
#include "fnkit/pos_tag.hpp"
#include "fnkit/rng.hpp"
#include "fnkit/text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace fnkit {

std::string_view to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::Fernandez: return "fernandez";
    case FeatureGroup::Abonizio: return "abonizio";
    case FeatureGroup::Liwc: return "liwc";
    case FeatureGroup::Nela: return "nela";
    case FeatureGroup::NelaModified: return "nela-mod";
    case FeatureGroup::TokenBow: return "bow";
    case FeatureGroup::TokenTfidf: return "tfidf";
  }
  return "unknown";
}

FeatureGroup parse_feature_group(std::string_view name) {
  for (auto g : {FeatureGroup::Fernandez, FeatureGroup::Abonizio, FeatureGroup::Liwc, FeatureGroup::Nela,
                 FeatureGroup::NelaModified, FeatureGroup::TokenBow, FeatureGroup::TokenTfidf}) {
    if (to_string(g) == name) return g;
  }
  if (name == "nela_modified" || name == "nela-modified") return FeatureGroup::NelaModified;
  fail(ErrorKind::InvalidInput, "unknown feature group '" + std::string(name) + "'");
}

bool is_token_group(FeatureGroup group) {
  return group == FeatureGroup::TokenBow || group == FeatureGroup::TokenTfidf;
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(ErrorKind::SchemaError, "feature '" + std::string(name) + "' not in schema");
  return static_cast<std::size_t>(it - names.begin());
}

std::string FeatureSchema::id() const {
  std::string joined;
  for (const auto& n : names) {
    joined += n;
    joined += '\n';
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(joined)));
  return std::string(to_string(group)) + (with_monetisation ? "+mon" : "") + "/" + hex;
}

namespace {

// ---- punctuation classification ------------------------------------------

enum class Punct {
  None,
  Exclamation,
  Question,
  Period,
  Comma,
  Colon,
  Semicolon,
  Dash,
  SingleQuote,
  DoubleQuote,
  OpenParen,
  CloseParen,
  Hash,
  At,
  Pound,
  Dollar,
  Ampersand,
  Percentage,
  Other,
};

char32_t single_cp(std::string_view s) {
  if (s.empty()) return 0;
  std::size_t pos = 0;
  const char32_t cp = text::next_codepoint(s, pos);
  return pos == s.size() ? cp : 0;
}

bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) return cp > 0x20 && cp < 0x7f && !((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'));
  if (cp >= 0xa1 && cp <= 0xbf) return true;
  if (cp == 0xd7 || cp == 0xf7) return true;
  if (cp >= 0x2010 && cp <= 0x205e) return true;
  if (cp >= 0x20a0 && cp <= 0x20cf) return true;
  if (cp >= 0x3000 && cp <= 0x303f) return true;
  return false;
}

Punct classify_punct(std::string_view token) {
  const char32_t cp = single_cp(token);
  if (!cp || !is_punct_cp(cp)) return Punct::None;
  switch (cp) {
    case '!': return Punct::Exclamation;
    case '?': return Punct::Question;
    case '.': case 0x2026: return Punct::Period;
    case ',': return Punct::Comma;
    case ':': return Punct::Colon;
    case ';': return Punct::Semicolon;
    case '-': case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014: case 0x2015: return Punct::Dash;
    case '\'': case 0x2018: case 0x2019: case 0x201a: case 0x2039: case 0x203a: return Punct::SingleQuote;
    case '"': case 0x201c: case 0x201d: case 0x201e: case 0xab: case 0xbb: return Punct::DoubleQuote;
    case '(': case '[': case '{': return Punct::OpenParen;
    case ')': case ']': case '}': return Punct::CloseParen;
    case '#': return Punct::Hash;
    case '@': return Punct::At;
    case 0xa3: return Punct::Pound;
    case '$': return Punct::Dollar;
    case '&': return Punct::Ampersand;
    case '%': return Punct::Percentage;
    default: return Punct::Other;
  }
}

std::size_t apostrophes_in(std::string_view word) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < word.size();) {
    if (text::is_apostrophe(text::next_codepoint(word, pos))) ++n;
  }
  return n;
}

std::string normalise_apostrophes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    const std::size_t b = pos;
    const char32_t cp = text::next_codepoint(s, pos);
    if (cp == 0x2019) {
      out += '\'';
    } else {
      out.append(s, b, pos - b);
    }
  }
  return out;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// ---- shared per-document analysis ----------------------------------------

struct Analysis {
  TokenStream ts;
  std::vector<std::string_view> words;
  std::vector<std::string> lower;  // lower-cased, apostrophes normalised
  std::vector<std::string_view> lower_views;
  TextCounts counts;
  std::map<Punct, std::size_t> punct;
  std::size_t punct_total = 0;

  explicit Analysis(std::string_view text) : ts(tokenize(text)) {
    for (const auto& tok : ts.tokens) {
      if (tok.is_word) {
        words.push_back(tok.text);
        lower.push_back(normalise_apostrophes(text::to_lower(tok.text)));
      } else if (auto p = classify_punct(tok.text); p != Punct::None) {
        ++punct[p];
        ++punct_total;
      }
    }
    if (words.empty()) fail(ErrorKind::DegenerateText, "text has no words");
    lower_views.assign(lower.begin(), lower.end());
    counts = text_counts(ts);
  }

  std::size_t p(Punct kind) const {
    auto it = punct.find(kind);
    return it == punct.end() ? 0 : it->second;
  }
  double wc() const { return static_cast<double>(words.size()); }
};

struct Tagged {
  std::vector<std::string> tokens;
  std::vector<PosTaggedToken> tags;
  std::map<std::string, std::size_t> counts;

  explicit Tagged(const TokenStream& ts) : tokens(treebank_tokens(ts)), tags(pos_tag(tokens)) {
    for (const auto& t : tags) ++counts[t.tag];
  }
  std::size_t count(std::string_view tag) const {
    auto it = counts.find(std::string(tag));
    return it == counts.end() ? 0 : it->second;
  }
};

std::size_t hits(const Analysis& a, const Lexicon& lex, std::string_view category) {
  return lexicon_hits(std::span<const std::string_view>(a.lower_views), lex, category);
}

SchemaPtr make_schema(FeatureGroup group, std::vector<std::string> names, std::vector<std::string> removed = {}) {
  auto s = std::make_shared<FeatureSchema>();
  s->group = group;
  s->names = std::move(names);
  s->removed = std::move(removed);
  std::set<std::string> seen;
  for (const auto& n : s->names) {
    if (!seen.insert(n).second) fail(ErrorKind::SchemaError, "duplicate feature name '" + n + "'");
  }
  return s;
}

// ---- Fernandez ------------------------------------------------------------

const std::vector<std::pair<std::string, std::string>>& fernandez_pct_features() {
  static const std::vector<std::pair<std::string, std::string>> list = {
      {"personal_pronouns_pct", "ppron"},    {"first_person_singular_pct", "i"},
      {"first_person_plural_pct", "we"},     {"second_person_pct", "you"},
      {"third_person_singular_pct", "shehe"}, {"third_person_plural_pct", "they"},
      {"impersonal_pronouns_pct", "ipron"},  {"articles_pct", "article"},
      {"prepositions_pct", "prep"},          {"auxiliary_verbs_pct", "auxverb"},
      {"common_adverbs_pct", "adverb"},      {"conjunctions_pct", "conj"},
      {"negations_pct", "negate"},           {"common_verbs_pct", "verb"},
      {"common_adjectives_pct", "adj"},      {"comparisons_pct", "compare"},
      {"concrete_figures_pct", "number"}};
  return list;
}

const std::vector<std::string>& fernandez_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"word_count",      "syllables_count",   "sentence_count", "words_per_sentence",
                                  "long_words_count", "all_caps_count",   "unique_words_count"};
    for (const auto& [name, _] : fernandez_pct_features()) n.push_back(name);
    for (const char* p : {"punctuation_count", "full_stop_count", "commas_count", "colons_count", "semicolons_count",
                          "question_marks_count", "exclamation_marks_count", "dashes_count", "apostrophe_count",
                          "brackets_count"}) {
      n.emplace_back(p);
    }
    return n;
  }();
  return names;
}

// ---- Abonizio -------------------------------------------------------------

const std::vector<std::string>& abonizio_upos() {
  static const std::vector<std::string> u = {"ADJ", "ADP", "ADV", "DET", "NOUN", "PRON", "PROPN", "PUNCT", "SYM", "VERB"};
  return u;
}

const std::vector<std::string>& abonizio_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"words_per_sentence", "avg_word_size",  "sentences",  "ttr",
                                  "pos_diversity_ratio", "entities_ratio", "upper_case", "oov_ratio",
                                  "quotes_count",       "quotes_ratio"};
    for (const auto& u : abonizio_upos()) n.push_back("ratio_" + text::to_lower(u));
    n.emplace_back("polarity");
    return n;
  }();
  return names;
}

// ---- NELA -----------------------------------------------------------------

const std::vector<std::pair<std::string, std::string>>& nela_punct_tags() {
  static const std::vector<std::pair<std::string, std::string>> list = {
      {"tag_dollar", "$"}, {"tag_close_quote", "''"}, {"tag_lparen", "("},      {"tag_rparen", ")"}, {"tag_comma", ","},
      {"tag_dash", "--"},  {"tag_period", "."},       {"tag_colon", ":"},       {"tag_open_quote", "``"}};
  return list;
}

const std::vector<std::string> kNelaComplexity = {"ttr",           "avg_wordlen", "word_count",          "avg_sentlen",
                                                  "flesch_kincaid_grade_level", "smog_index", "coleman_liau_index", "lix"};

const std::vector<std::string>& nela_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"quotes", "exclaim", "questions", "allpunc", "allcaps", "stops"};
    for (std::size_t i = 0; i < kPtbWordTagCount; ++i) n.emplace_back(kPtbTags[i]);
    for (const auto& [name, _] : nela_punct_tags()) n.push_back(name);
    n.insert(n.end(), kNelaComplexity.begin(), kNelaComplexity.end());
    n.insert(n.end(), kBiasCategories.begin(), kBiasCategories.end());
    for (const char* v : {"vadneg", "vadneu", "vadpos", "vadcompound"}) n.emplace_back(v);
    n.insert(n.end(), kSubjectivityCategories.begin(), kSubjectivityCategories.end());
    n.insert(n.end(), kMoralCategories.begin(), kMoralCategories.end());
    for (const char* e : {"num_locations", "num_dates", "num_times"}) n.emplace_back(e);
    return n;
  }();
  return names;
}

const std::vector<std::pair<std::string, Punct>>& modified_punct_features() {
  static const std::vector<std::pair<std::string, Punct>> list = {
      {"exclamation", Punct::Exclamation}, {"question", Punct::Question},         {"period", Punct::Period},
      {"comma", Punct::Comma},             {"colon", Punct::Colon},               {"semicolon", Punct::Semicolon},
      {"dash", Punct::Dash},               {"single_quote", Punct::SingleQuote},  {"double_quote", Punct::DoubleQuote},
      {"open_paren", Punct::OpenParen},    {"close_paren", Punct::CloseParen},    {"hash", Punct::Hash},
      {"at", Punct::At},                   {"pound", Punct::Pound},               {"dollar", Punct::Dollar},
      {"ampersand", Punct::Ampersand},     {"percentage", Punct::Percentage}};
  return list;
}

std::vector<std::string> nela_removed() {
  std::vector<std::string> r = {"quotes", "exclaim", "questions"};
  for (const auto& [name, _] : nela_punct_tags()) r.push_back(name);
  return r;
}

std::string modified_name(const std::string& nela_name) { return nela_name == "allcaps" ? "all_caps" : nela_name; }

const std::vector<std::string>& modified_names() {
  static const std::vector<std::string> names = [] {
    const auto removed = nela_removed();
    std::vector<std::string> n;
    const auto& base = nela_names();
    const std::size_t style_end = 6 + kPtbWordTagCount + nela_punct_tags().size();
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (i == style_end) {
        for (const auto& [name, _] : modified_punct_features()) n.push_back(name);
      }
      if (std::find(removed.begin(), removed.end(), base[i]) != removed.end()) continue;
      n.push_back(modified_name(base[i]));
    }
    return n;
  }();
  return names;
}

std::vector<double> nela_values(const Analysis& a, const LinguisticResources& res, std::string_view text) {
  const Tagged tagged(a.ts);
  const double wc = a.wc();
  std::vector<double> v;
  v.reserve(kNelaFeatureCount);

  std::size_t allcaps = 0;
  std::size_t stops = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) {
    if (text::is_all_caps_word(a.words[i])) ++allcaps;
    if (res.stopwords.contains(a.lower[i])) ++stops;
  }
  const double quotes = static_cast<double>(a.p(Punct::SingleQuote) + a.p(Punct::DoubleQuote));
  v.push_back(quotes);
  v.push_back(static_cast<double>(a.p(Punct::Exclamation)) / wc);
  v.push_back(static_cast<double>(a.p(Punct::Question)) / wc);
  v.push_back(static_cast<double>(a.punct_total) / wc);
  v.push_back(static_cast<double>(allcaps) / wc);
  v.push_back(static_cast<double>(stops) / wc);
  for (std::size_t i = 0; i < kPtbWordTagCount; ++i) v.push_back(static_cast<double>(tagged.count(kPtbTags[i])) / wc);
  for (const auto& [_, tag] : nela_punct_tags()) v.push_back(static_cast<double>(tagged.count(tag)) / wc);

  const Readability r = readability(a.counts);
  v.push_back(r.ttr);
  v.push_back(r.avg_wordlen);
  v.push_back(wc);
  v.push_back(wc / static_cast<double>(a.counts.sentences));
  v.push_back(r.flesch_kincaid_grade);
  v.push_back(r.smog);
  v.push_back(r.coleman_liau);
  v.push_back(r.lix);

  for (const auto& c : kBiasCategories) v.push_back(static_cast<double>(hits(a, res.bias, c)) / wc);
  const auto vs = valence_scores(std::span<const std::string_view>(a.lower_views), res.valence);
  v.push_back(vs.neg);
  v.push_back(vs.neu);
  v.push_back(vs.pos);
  v.push_back(valence_compound(std::span<const std::string_view>(a.lower_views), res.valence));
  for (const auto& c : kSubjectivityCategories) v.push_back(static_cast<double>(hits(a, res.subjectivity, c)) / wc);
  for (const auto& c : kMoralCategories) v.push_back(static_cast<double>(hits(a, res.moral, c)) / wc);

  v.push_back(static_cast<double>(res.gazetteer.count_matches(a.ts)));
  v.push_back(static_cast<double>(count_dates(text)));
  v.push_back(static_cast<double>(count_times(text)));
  return v;
}

const Lexicon& require_liwc(const LinguisticResources& res) {
  if (!res.liwc) fail(ErrorKind::DictionaryRequired, "a LIWC-format dictionary is required");
  return *res.liwc;
}

const std::vector<std::string> kLiwcHead = {"WC"};
const std::vector<std::string> kLiwcSummary = {"WPS", "BigWords", "Dic"};
const std::vector<std::string> kLiwcPunct = {"Period", "Comma", "QMark", "Exclam", "Apostro", "OtherP"};

}  // namespace

SchemaPtr fernandez_schema() {
  static const SchemaPtr s = make_schema(FeatureGroup::Fernandez, fernandez_names());
  return s;
}

SchemaPtr abonizio_schema() {
  static const SchemaPtr s = make_schema(FeatureGroup::Abonizio, abonizio_names());
  return s;
}

SchemaPtr nela_schema() {
  static const SchemaPtr s = make_schema(FeatureGroup::Nela, nela_names());
  return s;
}

SchemaPtr nela_modified_schema() {
  static const SchemaPtr s = make_schema(FeatureGroup::NelaModified, modified_names(), nela_removed());
  return s;
}

SchemaPtr liwc_schema(const Lexicon& dictionary) {
  std::vector<std::string> n = kLiwcHead;
  for (const auto& c : dictionary.composites) n.push_back(c.name);
  n.insert(n.end(), kLiwcSummary.begin(), kLiwcSummary.end());
  for (const auto& c : dictionary.categories()) n.push_back(c);
  n.insert(n.end(), kLiwcPunct.begin(), kLiwcPunct.end());
  return make_schema(FeatureGroup::Liwc, std::move(n));
}

SchemaPtr with_monetisation(const SchemaPtr& schema) {
  if (schema->with_monetisation) fail(ErrorKind::SchemaError, "monetisation features already appended");
  auto s = std::make_shared<FeatureSchema>(*schema);
  for (const auto& n : kMonetisationNames) {
    if (std::find(s->names.begin(), s->names.end(), n) != s->names.end()) {
      fail(ErrorKind::SchemaError, "schema already has a column named " + n);
    }
    s->names.push_back(n);
  }
  s->with_monetisation = true;
  return s;
}

FeatureVector fernandez_features(std::string_view text, const LinguisticResources& res) {
  const Lexicon& dict = require_liwc(res);
  const Analysis a(text);
  const double wc = a.wc();
  std::vector<double> v;
  v.reserve(kFernandezFeatureCount);
  std::size_t allcaps = 0;
  std::size_t in_word_apostrophes = 0;
  for (auto w : a.words) {
    if (text::is_all_caps_word(w)) ++allcaps;
    in_word_apostrophes += apostrophes_in(w);
  }
  v.push_back(wc);
  v.push_back(static_cast<double>(a.counts.syllables));
  v.push_back(static_cast<double>(a.counts.sentences));
  v.push_back(ratio(wc, static_cast<double>(a.counts.sentences)));
  v.push_back(static_cast<double>(a.counts.long_words));
  v.push_back(static_cast<double>(allcaps));
  v.push_back(static_cast<double>(a.counts.unique_words));

  std::vector<std::size_t> cat_ids;
  for (const auto& [_, cat] : fernandez_pct_features()) cat_ids.push_back(dict.category_index(cat));
  std::vector<std::size_t> cat_hits(cat_ids.size(), 0);
  const std::size_t number_slot = cat_ids.size() - 1;
  for (std::size_t i = 0; i < a.lower.size(); ++i) {
    const auto cats = dict.categories_of(a.lower[i]);
    for (std::size_t k = 0; k < cat_ids.size(); ++k) {
      const bool in_cat = std::binary_search(cats.begin(), cats.end(), cat_ids[k]);
      if (in_cat || (k == number_slot && text::is_numeric_token(a.lower[i]))) ++cat_hits[k];
    }
  }
  for (auto h : cat_hits) v.push_back(100.0 * static_cast<double>(h) / wc);

  v.push_back(static_cast<double>(a.punct_total));
  v.push_back(static_cast<double>(a.p(Punct::Period)));
  v.push_back(static_cast<double>(a.p(Punct::Comma)));
  v.push_back(static_cast<double>(a.p(Punct::Colon)));
  v.push_back(static_cast<double>(a.p(Punct::Semicolon)));
  v.push_back(static_cast<double>(a.p(Punct::Question)));
  v.push_back(static_cast<double>(a.p(Punct::Exclamation)));
  v.push_back(static_cast<double>(a.p(Punct::Dash)));
  std::size_t standalone_apostrophes = 0;
  for (const auto& tok : a.ts.tokens) {
    if (!tok.is_word && text::is_apostrophe(single_cp(tok.text))) ++standalone_apostrophes;
  }
  v.push_back(static_cast<double>(in_word_apostrophes + standalone_apostrophes));
  v.push_back(static_cast<double>(a.p(Punct::OpenParen) + a.p(Punct::CloseParen)));
  return {fernandez_schema(), std::move(v)};
}

FeatureVector abonizio_features(std::string_view text, const LinguisticResources& res) {
  const Analysis a(text);
  const Tagged tagged(a.ts);
  const double wc = a.wc();
  const double size = static_cast<double>(tagged.tags.size());
  const Readability r = readability(a.counts);
  std::vector<double> v;
  v.reserve(kAbonizioFeatureCount);
  v.push_back(wc / static_cast<double>(a.counts.sentences));
  v.push_back(r.avg_wordlen);
  v.push_back(static_cast<double>(a.counts.sentences));
  v.push_back(r.ttr);
  v.push_back(ratio(static_cast<double>(tagged.counts.size()), size));
  v.push_back(static_cast<double>(named_entity_tokens(a.ts)) / wc);

  std::size_t upper = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    if (text::is_upper(text::next_codepoint(text, pos))) ++upper;
  }
  v.push_back(static_cast<double>(upper));

  std::size_t oov = 0;
  for (const auto& w : a.lower) {
    if (!res.in_vocabulary(w)) ++oov;
  }
  v.push_back(static_cast<double>(oov) / wc);

  const double quotes = static_cast<double>(a.p(Punct::SingleQuote) + a.p(Punct::DoubleQuote));
  v.push_back(quotes);
  v.push_back(ratio(quotes, size));

  std::map<std::string, std::size_t> upos;
  for (const auto& t : tagged.tags) ++upos[std::string(res.universal_tag(t.tag))];
  for (const auto& u : abonizio_upos()) v.push_back(ratio(static_cast<double>(upos[u]), size));

  const auto vs = valence_scores(std::span<const std::string_view>(a.lower_views), res.valence);
  v.push_back(vs.pos - vs.neg);
  return {abonizio_schema(), std::move(v)};
}

FeatureVector liwc_features(std::string_view text, const Lexicon* dictionary) {
  if (!dictionary) fail(ErrorKind::DictionaryRequired, "a LIWC-format dictionary is required");
  const Lexicon& dict = *dictionary;
  const Analysis a(text);
  const double wc = a.wc();
  std::vector<std::size_t> cat_hits(dict.categories().size(), 0);
  std::size_t captured = 0;
  std::size_t big = 0;
  std::size_t in_word_apostrophes = 0;
  for (std::size_t i = 0; i < a.lower.size(); ++i) {
    const auto cats = dict.categories_of(a.lower[i]);
    if (!cats.empty()) ++captured;
    for (auto c : cats) ++cat_hits[c];
    if (text::letter_count(a.words[i]) >= 7) ++big;
    in_word_apostrophes += apostrophes_in(a.words[i]);
  }
  std::vector<double> pct(cat_hits.size());
  for (std::size_t c = 0; c < cat_hits.size(); ++c) pct[c] = 100.0 * static_cast<double>(cat_hits[c]) / wc;

  std::vector<double> v;
  v.push_back(wc);
  for (const auto& comp : dict.composites) {
    double s = comp.intercept;
    for (const auto& [cat, w] : comp.weights) s += w * pct[dict.category_index(cat)];
    v.push_back(s);
  }
  v.push_back(wc / static_cast<double>(a.counts.sentences));
  v.push_back(100.0 * static_cast<double>(big) / wc);
  v.push_back(100.0 * static_cast<double>(captured) / wc);
  v.insert(v.end(), pct.begin(), pct.end());

  const std::size_t period = a.p(Punct::Period);
  const std::size_t comma = a.p(Punct::Comma);
  const std::size_t qmark = a.p(Punct::Question);
  const std::size_t exclam = a.p(Punct::Exclamation);
  std::size_t standalone_apostrophes = 0;
  for (const auto& tok : a.ts.tokens) {
    if (!tok.is_word && text::is_apostrophe(single_cp(tok.text))) ++standalone_apostrophes;
  }
  const std::size_t other = a.punct_total - period - comma - qmark - exclam - standalone_apostrophes;
  for (std::size_t c : {period, comma, qmark, exclam, standalone_apostrophes + in_word_apostrophes, other}) {
    v.push_back(100.0 * static_cast<double>(c) / wc);
  }
  return {liwc_schema(dict), std::move(v)};
}

FeatureVector nela_features(std::string_view text, const LinguisticResources& res) {
  const Analysis a(text);
  return {nela_schema(), nela_values(a, res, text)};
}

FeatureVector modified_nela_features(std::string_view text, const LinguisticResources& res) {
  const Analysis a(text);
  const auto base = nela_values(a, res, text);
  const auto& base_names = nela_names();
  const auto& schema = nela_modified_schema();
  std::vector<double> v;
  v.reserve(schema->size());
  const auto removed = nela_removed();
  const std::size_t style_end = 6 + kPtbWordTagCount + nela_punct_tags().size();
  const double total = static_cast<double>(a.punct_total);
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (i == style_end) {
      for (const auto& [_, kind] : modified_punct_features()) v.push_back(ratio(static_cast<double>(a.p(kind)), total));
    }
    if (std::find(removed.begin(), removed.end(), base_names[i]) != removed.end()) continue;
    v.push_back(base[i]);
  }
  return {schema, std::move(v)};
}

FeatureVector extract_features(FeatureGroup group, std::string_view text, const LinguisticResources& res) {
  switch (group) {
    case FeatureGroup::Fernandez: return fernandez_features(text, res);
    case FeatureGroup::Abonizio: return abonizio_features(text, res);
    case FeatureGroup::Liwc: return liwc_features(text, res.liwc ? &*res.liwc : nullptr);
    case FeatureGroup::Nela: return nela_features(text, res);
    case FeatureGroup::NelaModified: return modified_nela_features(text, res);
    default: fail(ErrorKind::InvalidInput, "token groups are not stylistic extractors");
  }
}

SchemaPtr schema_for(FeatureGroup group, const LinguisticResources& res) {
  switch (group) {
    case FeatureGroup::Fernandez: return fernandez_schema();
    case FeatureGroup::Abonizio: return abonizio_schema();
    case FeatureGroup::Liwc: return liwc_schema(require_liwc(res));
    case FeatureGroup::Nela: return nela_schema();
    case FeatureGroup::NelaModified: return nela_modified_schema();
    default: fail(ErrorKind::InvalidInput, "token groups have no fixed schema");
  }
}

FeatureVector append_monetisation(const FeatureVector& v, const MonetisationFeatures& m) {
  FeatureVector out{with_monetisation(v.schema), v.values};
  for (auto x : {m.ads, m.ext_total, m.fb, m.twit}) out.values.push_back(static_cast<double>(x));
  return out;
}

Standardizer::Standardizer(std::vector<double> means, std::vector<double> stds)
    : means_(std::move(means)), stds_(std::move(stds)), fitted_(true) {
  if (means_.size() != stds_.size()) fail(ErrorKind::SchemaError, "standardizer means/stds length mismatch");
  for (double s : stds_) {
    if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorKind::InvalidInput, "standard deviations must be finite and >= 0");
  }
}

Standardizer Standardizer::fit(const Matrix& train) {
  if (train.rows() == 0) fail(ErrorKind::TooFewRows, "cannot fit a standardizer on zero rows");
  const std::size_t d = train.cols();
  std::vector<double> mean(d, 0.0);
  std::vector<double> sd(d, 0.0);
  const double n = static_cast<double>(train.rows());
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) s += train(r, c);
    const double m = s / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      const double dv = train(r, c) - m;
      ss += dv * dv;
    }
    mean[c] = m;
    sd[c] = std::sqrt(ss / n);
  }
  return Standardizer(std::move(mean), std::move(sd));
}

void Standardizer::transform_row(std::span<double> row) const {
  if (!fitted_) fail(ErrorKind::NotFitted, "standardizer used before fit");
  if (row.size() != means_.size()) fail(ErrorKind::SchemaError, "row width does not match standardizer");
  for (std::size_t c = 0; c < row.size(); ++c) {
    row[c] = stds_[c] > 0.0 ? (row[c] - means_[c]) / stds_[c] : 0.0;
  }
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (!fitted_) fail(ErrorKind::NotFitted, "standardizer used before fit");
  Matrix out = x;
  if (x.rows() > 0 && x.cols() != means_.size()) fail(ErrorKind::SchemaError, "matrix width does not match standardizer");
  for (std::size_t r = 0; r < out.rows(); ++r) transform_row(out.row(r));
  return out;
}

LabeledMatrix FeatureTable::labeled() const {
  LabeledMatrix m;
  m.x = values;
  m.y = labels;
  m.schema_id = schema.id();
  m.feature_names = schema.names;
  return m;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "non-finite value");
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string sidecar_path_for(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".schema.json");
  return p.string();
}

std::string schema_sidecar_json(const FeatureSchema& schema) {
  nlohmann::ordered_json j;
  j["group"] = std::string(to_string(schema.group));
  j["names"] = schema.names;
  j["with_monetisation"] = schema.with_monetisation;
  j["removed"] = schema.removed;
  j["schema_id"] = schema.id();
  return j.dump(2) + "\n";
}

FeatureSchema parse_schema_sidecar(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad schema sidecar: ") + e.what());
  }
  FeatureSchema s;
  try {
    s.group = parse_feature_group(j.at("group").get<std::string>());
    s.names = j.at("names").get<std::vector<std::string>>();
    s.with_monetisation = j.at("with_monetisation").get<bool>();
    if (j.contains("removed")) s.removed = j.at("removed").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad schema sidecar: ") + e.what());
  }
  return s;
}

namespace {

int parse_label(const std::string& s, const std::string& where) {
  if (s == "fake" || s == "0") return 0;
  if (s == "true" || s == "1") return 1;
  fail(ErrorKind::SchemaError, where + ": label must be fake/true, got '" + s + "'");
}

double parse_value(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(ErrorKind::SchemaError, where + ": bad numeric value '" + s + "'");
  }
  return v;
}

}  // namespace

void write_feature_csv(const std::string& path, const FeatureTable& table) {
  if (table.values.rows() != table.ids.size() || table.labels.size() != table.ids.size()) {
    fail(ErrorKind::SchemaError, "feature table ids/labels/rows disagree");
  }
  if (table.values.rows() > 0 && table.values.cols() != table.schema.size()) {
    fail(ErrorKind::SchemaError, "feature table width does not match schema");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  std::vector<std::string> header = {"id", "label"};
  header.insert(header.end(), table.schema.names.begin(), table.schema.names.end());
  out << csv::join_row(header) << '\n';
  for (std::size_t r = 0; r < table.ids.size(); ++r) {
    out << csv::escape(table.ids[r]) << ',' << (table.labels[r] == 1 ? "true" : "fake");
    for (double v : table.values.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
  std::ofstream side(sidecar_path_for(path), std::ios::binary);
  if (!side) fail(ErrorKind::Io, "cannot write schema sidecar for " + path);
  side << schema_sidecar_json(table.schema);
}

FeatureTable read_feature_csv(const std::string& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) fail(ErrorKind::SchemaError, path + ": empty feature file");
  const auto& header = rows[0];
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    fail(ErrorKind::SchemaError, path + ": header must start with id,label");
  }
  FeatureTable t;
  const std::string side = sidecar_path_for(path);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    t.schema = parse_schema_sidecar(buf.str());
    if (t.schema.names != std::vector<std::string>(header.begin() + 2, header.end())) {
      fail(ErrorKind::SchemaError, path + ": header does not match schema sidecar");
    }
  } else {
    t.schema.names.assign(header.begin() + 2, header.end());
    t.schema.group = FeatureGroup::Liwc;
    const auto& n = t.schema.names;
    t.schema.with_monetisation = n.size() >= 4 && std::equal(kMonetisationNames.begin(), kMonetisationNames.end(), n.end() - 4);
    for (auto g : {FeatureGroup::Fernandez, FeatureGroup::Abonizio, FeatureGroup::Nela, FeatureGroup::NelaModified}) {
      const auto& base = g == FeatureGroup::Fernandez  ? fernandez_schema()->names
                         : g == FeatureGroup::Abonizio ? abonizio_schema()->names
                         : g == FeatureGroup::Nela     ? nela_schema()->names
                                                       : nela_modified_schema()->names;
      if (std::equal(base.begin(), base.end(), n.begin(), n.begin() + static_cast<std::ptrdiff_t>(std::min(base.size(), n.size()))) &&
          n.size() == base.size() + (t.schema.with_monetisation ? 4 : 0)) {
        t.schema.group = g;
      }
    }
  }
  const std::size_t d = t.schema.size();
  t.values = Matrix(0, d);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path + ":" + std::to_string(r + 1);
    if (row.size() != d + 2) fail(ErrorKind::SchemaError, where + ": expected " + std::to_string(d + 2) + " fields");
    t.ids.push_back(row[0]);
    t.labels.push_back(parse_label(row[1], where));
    std::vector<double> vals(d);
    for (std::size_t c = 0; c < d; ++c) vals[c] = parse_value(row[c + 2], where);
    t.values.append_row(vals);
  }
  return t;
}

}  // namespace fnkit
