#include "fnkit/pos_tag.hpp"

#include "fnkit/text_util.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace fnkit {

namespace {

using WordTable = std::unordered_map<std::string_view, std::string_view>;

const WordTable& closed_class() {
  static const WordTable table = [] {
    WordTable t;
    auto add = [&t](std::string_view tag, std::initializer_list<std::string_view> words) {
      for (auto w : words) t.emplace(w, tag);
    };
    add("DT", {"the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any",
               "no", "another", "either", "neither", "whatever", "whichever"});
    add("PDT", {"all", "both", "half", "such", "quite", "rather"});
    add("PRP", {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "myself",
                "yourself", "himself", "herself", "itself", "ourselves", "yourselves", "themselves",
                "one", "mine", "yours", "hers", "ours", "theirs"});
    add("PRP$", {"my", "your", "his", "its", "our", "their"});
    add("WP", {"who", "whom", "what", "whoever", "whomever"});
    add("WP$", {"whose"});
    add("WDT", {"which"});
    add("WRB", {"when", "where", "why", "how", "whenever", "wherever", "whereby"});
    add("CC", {"and", "or", "but", "nor", "yet", "plus", "&"});
    add("IN", {"of", "in", "on", "at", "by", "for", "with", "from", "about", "into", "onto", "upon",
               "over", "under", "after", "before", "between", "among", "through", "during", "without",
               "within", "against", "toward", "towards", "across", "behind", "beyond", "beside",
               "besides", "near", "since", "until", "till", "because", "if", "although", "though",
               "while", "whether", "unless", "whereas", "than", "like", "per", "via", "despite",
               "throughout", "amid", "amongst", "below", "above", "around", "along", "inside",
               "outside", "beneath", "except", "so", "as"});
    add("TO", {"to"});
    add("MD", {"can", "could", "will", "would", "shall", "should", "may", "might", "must", "ought",
               "cannot", "wo", "ca"});
    add("UH", {"oh", "wow", "hey", "ouch", "yeah", "hello", "hi", "ah", "alas", "oops", "hmm",
               "okay", "ok", "yes", "ugh", "huh", "hooray", "bravo", "please"});
    add("FW", {"et", "al", "ibid", "de", "facto", "bona", "fide", "vis", "versa", "la", "le", "les",
               "der", "und", "el", "los", "ad", "hoc", "infinitum", "quo", "status"});
    add("EX", {});
    add("RB", {"not", "never", "very", "too", "also", "just", "only", "even", "still", "already",
               "always", "often", "usually", "sometimes", "again", "ever", "here", "now", "then",
               "there", "soon", "almost", "perhaps", "maybe", "quite", "really", "else", "instead",
               "however", "therefore", "thus", "indeed", "together", "away", "back", "ago", "yet",
               "n't", "once", "twice", "rather", "well", "anyway", "otherwise", "meanwhile"});
    add("RBR", {"more", "less", "further", "earlier", "later", "sooner"});
    add("RBS", {"most", "least"});
    add("RP", {"up", "out", "off", "down"});
    add("VBZ", {"is", "has", "does", "says", "'s"});
    add("VBP", {"are", "am", "have", "do", "'re", "'ve", "'m"});
    add("VBD", {"was", "were", "had", "did", "said", "told", "went", "made", "took", "came", "got",
                "saw", "knew", "thought", "gave", "found", "became", "left", "felt", "brought",
                "began", "kept", "held", "wrote", "stood", "heard", "meant", "met", "ran", "paid",
                "sat", "spoke", "led", "grew", "lost", "fell", "sent", "built", "understood",
                "drew", "broke", "spent", "rose", "drove", "bought", "wore", "chose", "won",
                "fought", "taught", "caught", "sold", "flew", "threw", "ate"});
    add("VBN", {"been", "done", "gone", "seen", "known", "taken", "given", "written", "spoken",
                "broken", "chosen", "driven", "eaten", "fallen", "forgotten", "gotten", "hidden",
                "ridden", "risen", "shaken", "stolen", "sworn", "thrown", "worn", "begun", "drawn",
                "grown", "flown", "shown"});
    add("VBG", {"being", "having", "doing", "going"});
    add("VB", {"be"});
    add("MD", {"'ll", "'d"});
    add("JJR", {"better", "worse", "bigger", "smaller", "greater", "larger", "higher", "lower",
                "older", "younger", "newer", "longer", "shorter", "stronger", "weaker", "richer",
                "poorer", "easier", "harder", "faster", "slower", "cheaper", "safer", "wider"});
    add("JJS", {"best", "worst", "biggest", "smallest", "greatest", "largest", "highest", "lowest",
                "oldest", "youngest", "newest", "longest", "shortest", "strongest", "weakest",
                "richest", "poorest", "easiest", "hardest", "fastest", "slowest", "cheapest"});
    add("JJ", {"big", "small", "good", "bad", "new", "old", "great", "high", "large", "little",
               "long", "young", "important", "different", "early", "late", "public", "able", "same",
               "real", "whole", "free", "full", "sure", "clear", "true", "false", "fake", "silly",
               "huge", "major", "local", "national", "political", "social", "economic", "strong",
               "weak", "poor", "rich", "easy", "hard", "fast", "slow", "cheap", "safe", "wide",
               "last", "next", "first", "other", "many", "much", "few", "several", "own", "former",
               "latest", "recent", "top", "black", "white", "red", "open", "shocking", "amazing",
               "incredible", "terrible", "horrible", "wonderful", "official", "federal", "foreign"});
    add("CD", {"zero", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
               "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
               "eighteen", "nineteen", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
               "eighty", "ninety", "hundred", "thousand", "million", "billion", "trillion",
               "dozen"});
    return t;
  }();
  return table;
}

const std::unordered_set<std::string_view>& base_verbs() {
  static const std::unordered_set<std::string_view> set = {
      "say", "make", "go", "take", "come", "see", "know", "get", "give", "find", "think", "tell",
      "become", "show", "leave", "feel", "put", "bring", "begin", "keep", "hold", "write", "stand",
      "hear", "let", "mean", "set", "meet", "run", "pay", "sit", "speak", "lie", "lead", "read",
      "grow", "lose", "fall", "send", "build", "understand", "draw", "break", "spend", "cut",
      "rise", "drive", "buy", "wear", "choose", "want", "use", "work", "call", "try", "ask",
      "need", "seem", "help", "talk", "turn", "start", "play", "move", "live", "believe",
      "happen", "walk", "swim", "claim", "report", "announce", "reveal", "allow", "add", "win",
      "fight", "teach", "catch", "sell", "fly", "eat", "stop", "look", "watch", "follow",
      "create", "provide", "include", "continue", "change", "expect", "remember", "consider",
      "appear", "serve", "die", "send", "agree", "kill", "remain", "suggest", "raise", "pass",
      "require", "decide", "pull", "warn", "deny", "admit", "insist", "share", "click", "join"};
  return set;
}

const std::unordered_set<std::string_view>& be_have_forms() {
  static const std::unordered_set<std::string_view> set = {
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "having",
      "'s", "'re", "'ve", "'m", "'d", "get", "got", "gets"};
  return set;
}

bool is_punct_token(std::string_view s) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  const char32_t cp = text::next_codepoint(s, pos);
  return pos == s.size() && !text::is_letter(cp) && !text::is_digit(cp);
}

std::string_view punct_tag(std::string_view s, bool& open_double) {
  if (s == "." || s == "!" || s == "?" || s == "…") return ".";
  if (s == ",") return ",";
  if (s == ":" || s == ";") return ":";
  if (s == "-" || s == "–" || s == "—") return "--";
  if (s == "(" || s == "[" || s == "{") return "(";
  if (s == ")" || s == "]" || s == "}") return ")";
  if (s == "“" || s == "‘" || s == "«") return "``";
  if (s == "”" || s == "’" || s == "»" || s == "'") return "''";
  if (s == "\"") {
    open_double = !open_double;
    return open_double ? "``" : "''";
  }
  if (s == "$" || s == "£" || s == "€" || s == "¥" || s == "¢") return "$";
  if (s == "&") return "CC";
  if (s == "%") return "NN";
  return "SYM";
}

bool is_number_like(std::string_view w) {
  bool digit = false;
  for (char c : w) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

bool has_digit(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool nounish(std::string_view tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS" || tag == "PRP";
}

bool determiner_like(std::string_view tag) {
  return tag == "DT" || tag == "PRP$" || tag == "JJ" || tag == "JJR" || tag == "JJS" || tag == "PDT" ||
         tag == "CD" || tag == "POS" || tag == "WP$";
}

std::string_view adjective_suffix(std::string_view w) {
  for (std::string_view suf : {"ous", "ful", "ive", "able", "ible", "less", "ical", "ish", "ary", "ic", "al"}) {
    if (w.size() > suf.size() + 2 && w.ends_with(suf)) return "JJ";
  }
  return {};
}

}  // namespace

bool is_ptb_tag(std::string_view tag) {
  return std::find(kPtbTags.begin(), kPtbTags.end(), tag) != kPtbTags.end();
}

std::vector<std::string> treebank_tokens(const TokenStream& stream) {
  std::vector<std::string> out;
  out.reserve(stream.tokens.size() + 8);
  for (const auto& tok : stream.tokens) {
    if (!tok.is_word) {
      out.push_back(tok.text);
      continue;
    }
    std::string w = tok.text;
    // Normalise typographic apostrophes for clitic detection.
    std::string plain;
    for (std::size_t pos = 0; pos < w.size();) {
      const std::size_t b = pos;
      const char32_t cp = text::next_codepoint(w, pos);
      if (cp == 0x2019) {
        plain += '\'';
      } else {
        plain.append(w, b, pos - b);
      }
    }
    const std::string lower = text::to_lower(plain);
    bool split = false;
    if (lower.size() > 3 && lower.ends_with("n't")) {
      out.push_back(plain.substr(0, plain.size() - 3));
      out.push_back(plain.substr(plain.size() - 3));
      split = true;
    } else {
      for (std::string_view clitic : {"'s", "'re", "'ve", "'ll", "'d", "'m"}) {
        if (lower.size() > clitic.size() && lower.ends_with(clitic)) {
          out.push_back(plain.substr(0, plain.size() - clitic.size()));
          out.push_back(plain.substr(plain.size() - clitic.size()));
          split = true;
          break;
        }
      }
    }
    if (!split) out.push_back(plain);
  }
  return out;
}

std::vector<PosTaggedToken> RuleTagger::tag(std::span<const std::string> tokens) const {
  std::vector<PosTaggedToken> out;
  out.reserve(tokens.size());
  bool open_double = false;
  bool sentence_start = true;
  const auto& closed = closed_class();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& surface = tokens[i];
    const std::string lower = text::to_lower(surface);
    const std::string_view prev = out.empty() ? std::string_view{} : std::string_view(out.back().tag);
    const std::string prev_lower = i > 0 ? text::to_lower(tokens[i - 1]) : std::string{};
    const std::string next_lower = i + 1 < tokens.size() ? text::to_lower(tokens[i + 1]) : std::string{};
    std::string_view tag;

    if (surface.empty()) {
      tag = "SYM";
    } else if (is_punct_token(surface) && lower != "'s") {
      tag = punct_tag(surface, open_double);
    } else if (is_number_like(lower)) {
      tag = "CD";
    } else if (lower == "'s") {
      static const std::unordered_set<std::string_view> pronoun_hosts = {
          "it", "he", "she", "that", "there", "what", "who", "where", "here", "how"};
      tag = pronoun_hosts.contains(prev_lower) ? "VBZ" : "POS";
    } else if (lower == "there" && (next_lower == "is" || next_lower == "are" || next_lower == "was" ||
                                    next_lower == "were" || next_lower == "'s" || next_lower == "has" ||
                                    next_lower == "have" || next_lower == "will" || next_lower == "seems")) {
      tag = "EX";
    } else if (lower == "that") {
      tag = nounish(prev) ? "WDT" : (next_lower.empty() || is_punct_token(tokens[i + 1]) ? "DT" : "IN");
      if (prev == "VBD" || prev == "VBZ" || prev == "VBP") tag = "IN";
      if (i + 1 < tokens.size() && closed.contains(next_lower) == false && !is_punct_token(tokens[i + 1]) &&
          !nounish(prev) && prev != "VBD" && prev != "VBZ" && prev != "VBP") {
        tag = "DT";
      }
    } else if (lower == "her") {
      const bool next_open = i + 1 < tokens.size() && !is_punct_token(tokens[i + 1]) && !closed.contains(next_lower);
      tag = next_open ? "PRP$" : "PRP";
    } else if ((lower == "up" || lower == "out" || lower == "off" || lower == "down") &&
               !(prev.starts_with("VB"))) {
      tag = "IN";
    } else if (lower == "more" || lower == "less") {
      tag = (!next_lower.empty() && closed.contains(next_lower) && closed.at(next_lower) == "JJ") ||
                    adjective_suffix(next_lower) == "JJ"
                ? "RBR"
                : "JJR";
    } else if (lower == "most" || lower == "least") {
      tag = (!next_lower.empty() && closed.contains(next_lower) && closed.at(next_lower) == "JJ") ||
                    adjective_suffix(next_lower) == "JJ"
                ? "RBS"
                : "JJS";
    } else if (auto it = closed.find(lower); it != closed.end()) {
      tag = it->second;
      if (tag == "RP") tag = "IN";
    } else if (base_verbs().contains(lower)) {
      if (prev == "TO" || prev == "MD" || prev_lower == "do" || prev_lower == "does" || prev_lower == "did" ||
          prev_lower == "n't") {
        tag = "VB";
      } else if (determiner_like(prev) || prev == "IN") {
        tag = "NN";
      } else if (prev == "PRP" && prev_lower != "he" && prev_lower != "she" && prev_lower != "it") {
        tag = "VBP";
      } else if (nounish(prev) && (prev == "NNS" || prev == "NNPS")) {
        tag = "VBP";
      } else {
        tag = "VB";
      }
    } else if (has_digit(lower)) {
      tag = "CD";
    } else if (text::is_capitalised(surface) && !sentence_start) {
      tag = lower.size() > 3 && lower.ends_with('s') && !lower.ends_with("ss") ? "NNPS" : "NNP";
    } else if (text::is_all_caps_word(surface)) {
      tag = "NNP";
    } else if (lower.size() > 3 && lower.ends_with("ly")) {
      tag = "RB";
    } else if (lower.size() > 4 && lower.ends_with("ing")) {
      tag = "VBG";
    } else if (lower.size() > 3 && lower.ends_with("ed")) {
      tag = be_have_forms().contains(prev_lower) ? "VBN" : "VBD";
    } else if (lower.size() > 4 && lower.ends_with("est") && adjective_suffix(lower.substr(0, lower.size() - 3)).empty() &&
               (closed.contains(lower.substr(0, lower.size() - 3)) || closed.contains(lower.substr(0, lower.size() - 2)))) {
      tag = "JJS";
    } else if (!adjective_suffix(lower).empty()) {
      tag = "JJ";
    } else if (lower.size() > 3 && lower.ends_with('s') && !lower.ends_with("ss") && !lower.ends_with("us") &&
               !lower.ends_with("is")) {
      tag = (prev == "PRP" && (prev_lower == "he" || prev_lower == "she" || prev_lower == "it")) ? "VBZ" : "NNS";
    } else if (text::is_capitalised(surface)) {
      tag = "NNP";
    } else {
      tag = "NN";
    }

    // Sentence-initial capitalised words that are plain nouns stay NN.
    if (sentence_start && tag == "NNP" && !text::is_all_caps_word(surface) && closed.contains(lower)) {
      tag = closed.at(lower);
    }
    if (!is_ptb_tag(tag)) tag = "NN";
    out.push_back({surface, std::string(tag)});
    sentence_start = tag == "." || tag == "``" || (sentence_start && (tag == "(" || tag == "``"));
  }
  return out;
}

std::vector<PosTaggedToken> pos_tag(std::span<const std::string> tokens) {
  static const RuleTagger tagger;
  return tagger.tag(tokens);
}

std::string_view default_universal_tag(std::string_view t) {
  if (t == "CC") return "CCONJ";
  if (t == "CD") return "NUM";
  if (t == "DT" || t == "PDT" || t == "WDT") return "DET";
  if (t == "EX" || t == "PRP" || t == "PRP$" || t == "WP" || t == "WP$") return "PRON";
  if (t == "FW" || t == "LS") return "X";
  if (t == "IN" || t == "RP") return "ADP";
  if (t == "JJ" || t == "JJR" || t == "JJS") return "ADJ";
  if (t == "MD" || t.starts_with("VB")) return "VERB";
  if (t == "NN" || t == "NNS") return "NOUN";
  if (t == "NNP" || t == "NNPS") return "PROPN";
  if (t == "POS" || t == "TO") return "PART";
  if (t == "RB" || t == "RBR" || t == "RBS" || t == "WRB") return "ADV";
  if (t == "SYM" || t == "$") return "SYM";
  if (t == "UH") return "INTJ";
  return "PUNCT";
}

}  // namespace fnkit
