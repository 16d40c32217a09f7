#include "fnkit/resources.hpp"

#include "fnkit/error.hpp"
#include "fnkit/pos_tag.hpp"
#include "fnkit/text_util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>

namespace fnkit {

namespace fs = std::filesystem;

void Gazetteer::add(std::string_view name) {
  std::vector<std::string> parts;
  for (auto& p : text::split(text::trim(name), ' ')) {
    if (!p.empty()) parts.push_back(text::to_lower(p));
  }
  if (parts.empty()) return;
  auto& bucket = by_first_[parts.front()];
  if (std::find(bucket.begin(), bucket.end(), parts) != bucket.end()) return;
  bucket.push_back(std::move(parts));
  std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  ++size_;
}

std::size_t Gazetteer::count_matches(const TokenStream& stream) const {
  std::size_t n = 0;
  for (const auto& [begin, end] : stream.sentences) {
    std::vector<const Token*> words;
    for (std::size_t i = begin; i < end; ++i) {
      if (stream.tokens[i].is_word) words.push_back(&stream.tokens[i]);
    }
    for (std::size_t i = 0; i < words.size();) {
      std::size_t matched = 0;
      if (text::is_capitalised(words[i]->text)) {
        auto it = by_first_.find(text::to_lower(words[i]->text));
        if (it != by_first_.end()) {
          for (const auto& parts : it->second) {
            if (i + parts.size() > words.size()) continue;
            bool ok = true;
            for (std::size_t k = 1; k < parts.size() && ok; ++k) ok = text::to_lower(words[i + k]->text) == parts[k];
            if (ok) {
              matched = parts.size();
              break;
            }
          }
        }
      }
      if (matched) {
        ++n;
        i += matched;
      } else {
        ++i;
      }
    }
  }
  return n;
}

Gazetteer load_gazetteer(const std::string& path) {
  Gazetteer g;
  for (const auto& line : read_word_list(path)) g.add(line);
  return g;
}

namespace {

const std::regex& date_pattern() {
  static const std::string month =
      "(?:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|"
      "sept?(?:ember)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)";
  static const std::regex re(
      "\\b(?:" + month + "\\.?\\s+\\d{1,2}(?:st|nd|rd|th)?(?:,?\\s+\\d{4})?" +
          "|\\d{1,2}(?:st|nd|rd|th)?\\s+(?:of\\s+)?" + month + "\\b\\.?(?:,?\\s+\\d{4})?" +
          "|" + month + "\\s+\\d{4}" +
          "|\\d{4}-\\d{1,2}-\\d{1,2}" +
          "|\\d{1,2}/\\d{1,2}/\\d{2,4}" +
          "|(?:monday|tuesday|wednesday|thursday|friday|saturday|sunday)" +
          "|(?:yesterday|today|tomorrow))\\b",
      std::regex::icase | std::regex::optimize);
  return re;
}

const std::regex& time_pattern() {
  static const std::regex re(
      "\\b(?:\\d{1,2}:\\d{2}(?:\\s*[ap]\\.?m\\b\\.?)?|\\d{1,2}\\s*[ap]\\.?m\\b\\.?|noon|midnight|"
      "(?:this|last|next)\\s+(?:morning|afternoon|evening|night|week|month|year))",
      std::regex::icase | std::regex::optimize);
  return re;
}

std::size_t count_regex(std::string_view text, const std::regex& re) {
  const std::string s(text);
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(s.begin(), s.end(), re), std::sregex_iterator()));
}

}  // namespace

std::size_t count_dates(std::string_view text) { return count_regex(text, date_pattern()); }
std::size_t count_times(std::string_view text) { return count_regex(text, time_pattern()); }

bool LinguisticResources::in_vocabulary(std::string_view lower_word) const {
  if (lower_word.empty()) return false;
  if (text::is_numeric_token(lower_word)) return true;
  const std::string w(lower_word);
  if (vocabulary_.contains(w)) return true;
  const std::string lemma = lemmatize(w);
  if (vocabulary_.contains(lemma)) return true;
  for (const std::string* form : {&w, &lemma}) {
    for (std::size_t n = 1; n <= std::min(form->size(), max_stem_); ++n) {
      if (stems_.contains(form->substr(0, n))) return true;
    }
  }
  return false;
}

std::string_view LinguisticResources::universal_tag(std::string_view ptb) const {
  if (auto it = universal_tags.find(std::string(ptb)); it != universal_tags.end()) return it->second;
  return default_universal_tag(ptb);
}

void LinguisticResources::build_vocabulary() {
  vocabulary_.clear();
  stems_.clear();
  max_stem_ = 0;
  vocabulary_.insert(stopwords.begin(), stopwords.end());
  for (const auto& w : valence.words()) vocabulary_.insert(w);
  auto take = [this](const Lexicon& lex) {
    for (const auto& w : lex.literal_words()) vocabulary_.insert(w);
    for (const auto& s : lex.stems()) {
      max_stem_ = std::max(max_stem_, s.size());
      stems_.insert(s);
    }
  };
  if (liwc) take(*liwc);
  take(bias);
  take(subjectivity);
  take(moral);
}

std::shared_ptr<const LinguisticResources> load_resources(const std::string& data_dir) {
  const fs::path dir(data_dir);
  if (!fs::is_directory(dir)) fail(ErrorKind::Io, "resource directory not found: " + data_dir);
  auto res = std::make_shared<LinguisticResources>();
  for (auto& w : read_word_list((dir / "stopwords_en.txt").string())) res->stopwords.insert(std::move(w));
  if (fs::exists(dir / "liwc_open.dic")) res->liwc = load_liwc_dictionary((dir / "liwc_open.dic").string());
  res->valence = load_valence_lexicon((dir / "valence.tsv").string());
  res->bias = load_word_list_dir((dir / "bias").string(), "bias", kBiasCategories);
  res->subjectivity = load_word_list_dir((dir / "subjectivity").string(), "subjectivity", kSubjectivityCategories);
  res->moral = load_word_list_dir((dir / "moral").string(), "moral", kMoralCategories);
  res->gazetteer = load_gazetteer((dir / "gazetteer.txt").string());
  {
    std::ifstream in(dir / "ptb_upos.tsv");
    if (!in) fail(ErrorKind::Io, "cannot open ptb_upos.tsv");
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      res->universal_tags[line.substr(0, tab)] = text::trim(line.substr(tab + 1));
    }
  }
  res->build_vocabulary();
  return res;
}

}  // namespace fnkit
