#pragma once

#include "fnkit/lingcore.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fnkit {

// Weighted sum of category percentages plus an intercept, for dictionaries
// that ship summary-variable formulas.
struct CompositeScore {
  std::string name;
  double intercept = 0.0;
  std::vector<std::pair<std::string, double>> weights;
};

// Category -> patterns. A pattern ending in '*' matches by prefix, anything
// else matches exactly. Patterns are stored lower-case.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  // Categories in declaration order.
  const std::vector<std::string>& categories() const { return categories_; }
  bool has_category(std::string_view category) const;
  std::size_t category_index(std::string_view category) const;  // throws CategoryError

  void add_category(const std::string& category);
  void add_pattern(std::string_view pattern, std::string_view category);

  // Category indices the token belongs to, ascending. Token is lower-cased here.
  std::vector<std::size_t> categories_of(std::string_view token) const;
  bool matches(std::string_view token, std::size_t category) const;
  bool contains(std::string_view token) const { return !categories_of(token).empty(); }

  std::vector<CompositeScore> composites;

  // Every literal pattern and every stem (without '*').
  std::vector<std::string> literal_words() const;
  std::vector<std::string> stems() const;

 private:
  std::string name_;
  std::vector<std::string> categories_;
  std::unordered_map<std::string, std::size_t> category_ids_;
  std::unordered_map<std::string, std::vector<std::size_t>> literals_;
  std::unordered_map<std::string, std::vector<std::size_t>> stems_;
  std::size_t max_stem_ = 0;
};

// `%` / id name lines / `%` / pattern<TAB>ids... An optional third `%` block
// holds composites: name<TAB>intercept<TAB>category:weight ...
Lexicon parse_liwc_dictionary(std::string_view text, std::string name = "liwc");
Lexicon load_liwc_dictionary(const std::string& path);

// Directory of one-word-per-line files; each file stem is a category.
// Categories are ordered by `order` when given, else by file name.
Lexicon load_word_list_dir(const std::string& dir, std::string name,
                           const std::vector<std::string>& order = {});
std::vector<std::string> read_word_list(const std::string& path);

std::size_t lexicon_hits(std::span<const std::string_view> tokens, const Lexicon& lexicon,
                         std::string_view category);
std::size_t lexicon_hits(std::span<const std::string> tokens, const Lexicon& lexicon,
                         std::string_view category);

class ValenceLexicon {
 public:
  void set(std::string_view word, double score);
  std::optional<double> score(std::string_view token) const;
  std::size_t size() const { return scores_.size(); }
  std::vector<std::string> words() const;

 private:
  std::unordered_map<std::string, double> scores_;
};

// word<TAB>score[<TAB>...]; extra columns are ignored.
ValenceLexicon parse_valence_lexicon(std::string_view text);
ValenceLexicon load_valence_lexicon(const std::string& path);

struct ValenceScores {
  double neg = 0.0;
  double neu = 1.0;
  double pos = 0.0;
};

inline constexpr double kValenceThreshold = 0.05;

ValenceScores valence_scores(std::span<const std::string_view> tokens, const ValenceLexicon& lexicon);
ValenceScores valence_scores(std::span<const std::string> tokens, const ValenceLexicon& lexicon);

// Sum of token valences squashed to (-1, 1): s / sqrt(s^2 + 15).
double valence_compound(std::span<const std::string_view> tokens, const ValenceLexicon& lexicon);

struct TextCounts {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  std::size_t polysyllables = 0;  // words with >= 3 syllables
  std::size_t letters = 0;
  std::size_t long_words = 0;  // words with > 6 characters
  std::size_t unique_words = 0;  // case-insensitive
};

TextCounts text_counts(const TokenStream& stream);

struct Readability {
  double flesch_kincaid_grade = 0.0;
  double smog = 0.0;
  double coleman_liau = 0.0;
  double lix = 0.0;
  double ttr = 0.0;
  double avg_wordlen = 0.0;
};

// Throws DegenerateText when words or sentences is zero.
Readability readability(const TextCounts& counts);

// Maximal runs of capitalised word tokens that do not start a sentence.
std::size_t named_entity_runs(const TokenStream& stream);
// Number of word tokens inside those runs.
std::size_t named_entity_tokens(const TokenStream& stream);

}  // namespace fnkit
