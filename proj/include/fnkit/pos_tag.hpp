#pragma once

#include "fnkit/lingcore.hpp"

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fnkit {

// Penn Treebank tags: 36 word-level tags followed by 9 punctuation tags.
inline constexpr std::array<std::string_view, 45> kPtbTags = {
    "CC",  "CD",  "DT",  "EX",  "FW",  "IN",  "JJ",  "JJR", "JJS", "LS",  "MD",  "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",  "SYM",
    "TO",  "UH",  "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB",
    "$",   "''",  "(",   ")",   ",",   "--",  ".",   ":",   "``"};

inline constexpr std::size_t kPtbWordTagCount = 36;

bool is_ptb_tag(std::string_view tag);

struct PosTaggedToken {
  std::string surface;
  std::string tag;

  bool operator==(const PosTaggedToken&) const = default;
};

// Splits clitics off word tokens the way Treebank tokenisation does
// ("don't" -> "do" "n't", "John's" -> "John" "'s").
std::vector<std::string> treebank_tokens(const TokenStream& stream);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  // Exactly one tag from kPtbTags per input token.
  virtual std::vector<PosTaggedToken> tag(std::span<const std::string> tokens) const = 0;
};

// Closed-class lexicon plus suffix heuristics; defaults to NN. Deterministic.
class RuleTagger final : public PosTagger {
 public:
  std::vector<PosTaggedToken> tag(std::span<const std::string> tokens) const override;
};

std::vector<PosTaggedToken> pos_tag(std::span<const std::string> tokens);

// Coarse universal class for a Treebank tag, from the bundled mapping
// (ADJ, ADP, ADV, DET, NOUN, PRON, PROPN, PUNCT, SYM, VERB, NUM, CCONJ, ...).
std::string_view default_universal_tag(std::string_view ptb_tag);

}  // namespace fnkit
