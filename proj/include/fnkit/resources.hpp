#pragma once

#include "fnkit/lexicon.hpp"
#include "fnkit/lingcore.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fnkit {

// Place names, single or multi-word. Matching is case-insensitive but the
// first token of a match must be capitalised.
class Gazetteer {
 public:
  void add(std::string_view name);
  std::size_t size() const { return size_; }
  // Non-overlapping longest matches over the word tokens of each sentence.
  std::size_t count_matches(const TokenStream& stream) const;

 private:
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_;
  std::size_t size_ = 0;
};

Gazetteer load_gazetteer(const std::string& path);

std::size_t count_dates(std::string_view text);
std::size_t count_times(std::string_view text);

inline const std::vector<std::string> kBiasCategories = {
    "bias_words", "assertatives", "factives", "hedges",
    "implicatives", "report_verbs", "positive_opinion_words", "negative_opinion_words"};
inline const std::vector<std::string> kSubjectivityCategories = {"wneg", "wpos", "wneu", "sneg", "spos", "sneu"};
inline const std::vector<std::string> kMoralCategories = {
    "HarmVirtue",      "HarmVice",      "FairnessVirtue", "FairnessVice",
    "IngroupVirtue",   "IngroupVice",   "AuthorityVirtue", "AuthorityVice",
    "PurityVirtue",    "PurityVice",    "MoralityGeneral"};

struct LinguisticResources {
  std::unordered_set<std::string> stopwords;
  std::optional<Lexicon> liwc;
  ValenceLexicon valence;
  Lexicon bias{"bias"};
  Lexicon subjectivity{"subjectivity"};
  Lexicon moral{"moral"};
  Gazetteer gazetteer;
  std::unordered_map<std::string, std::string> universal_tags;  // PTB -> universal

  // Known-word test used for out-of-vocabulary ratios: the surface or its
  // lemma appears in a bundled word list or lexicon. Numbers are known.
  bool in_vocabulary(std::string_view lower_word) const;
  std::string_view universal_tag(std::string_view ptb) const;

  void build_vocabulary();

 private:
  std::unordered_set<std::string> vocabulary_;
  std::unordered_set<std::string> stems_;
  std::size_t max_stem_ = 0;
};

// Expects the layout of the bundled data/ directory. The LIWC-format
// dictionary is optional (liwc_open.dic); everything else is required.
std::shared_ptr<const LinguisticResources> load_resources(const std::string& data_dir);

}  // namespace fnkit
