#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fnkit {

struct Token {
  std::string text;
  std::size_t offset = 0;  // byte offset into the source text
  bool is_word = false;    // letters/digits/internal apostrophes

  bool operator==(const Token&) const = default;
};

struct TokenStream {
  std::vector<Token> tokens;
  // [begin, end) token-index ranges; they partition [0, tokens.size()).
  std::vector<std::pair<std::size_t, std::size_t>> sentences;

  std::size_t word_count() const;
  std::vector<std::string_view> words() const;
};

// Word tokens are maximal runs of letters and digits, with apostrophes kept
// when they sit between two word characters ("don't") and '.'/',' kept
// between digits ("3.5", "1,000"). Every other non-space code point is its
// own token. Sentences end at a run of . ! ? (plus closing quotes/brackets)
// followed by whitespace and a capitalised word, unless the '.' follows a
// known abbreviation or an initial; a newline between tokens also ends a
// sentence.
TokenStream tokenize(std::string_view text);

// Vowel-group syllable heuristic (y counts as a vowel after the first
// letter), silent trailing "e"/"es"/"ed" rule, minimum 1.
// Throws Error(InvalidWord) when `word` is empty or has non-letters.
std::size_t count_syllables(std::string_view word);

// Syllables of a word token: letters only; tokens without letters count 1.
std::size_t token_syllables(std::string_view token);

// Rule-based lemmatiser for lower-case tokens: irregular-forms table, then
// ies->y, (s)es/s removal with guards, ing/ed removal with doubling repair.
std::string lemmatize(std::string_view token);

bool is_abbreviation(std::string_view lower_word);

}  // namespace fnkit
