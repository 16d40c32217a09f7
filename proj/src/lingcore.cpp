#include "fnkit/lingcore.hpp"

#include "fnkit/error.hpp"
#include "fnkit/text_util.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace fnkit {

namespace {

struct CodePoint {
  char32_t cp;
  std::size_t begin;
  std::size_t end;
};

bool word_cp(char32_t cp) { return text::is_letter(cp) || text::is_digit(cp); }

bool is_terminator(std::string_view t) { return t == "." || t == "!" || t == "?" || t == "…"; }

bool is_closer(std::string_view t) {
  return t == ")" || t == "]" || t == "\"" || t == "'" || t == "”" || t == "’" || t == "»";
}

bool is_opener(std::string_view t) {
  return t == "(" || t == "[" || t == "\"" || t == "'" || t == "“" || t == "‘" || t == "«";
}

const std::unordered_set<std::string_view>& abbreviations() {
  static const std::unordered_set<std::string_view> set = {
      "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "gen", "gov", "sen", "rep",
      "col", "lt", "sgt", "capt", "cmdr", "adm", "rev", "hon", "pres", "vs", "etc", "inc",
      "ltd", "co", "corp", "no", "fig", "jan", "feb", "mar", "apr", "jun", "jul", "aug",
      "sep", "sept", "oct", "nov", "dec", "approx", "dept", "est", "ave", "blvd", "mrs",
      "messrs", "univ", "vol", "pp", "ed", "eds", "al"};
  return set;
}

}  // namespace

bool is_abbreviation(std::string_view lower_word) { return abbreviations().contains(lower_word); }

std::size_t TokenStream::word_count() const {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_word; }));
}

std::vector<std::string_view> TokenStream::words() const {
  std::vector<std::string_view> out;
  for (const auto& t : tokens) {
    if (t.is_word) out.emplace_back(t.text);
  }
  return out;
}

TokenStream tokenize(std::string_view text) {
  std::vector<CodePoint> cps;
  cps.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t begin = pos;
    const char32_t cp = text::next_codepoint(text, pos);
    cps.push_back({cp, begin, pos});
  }

  TokenStream ts;
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    const char32_t cp = cps[i].cp;
    if (text::is_space(cp)) {
      ++i;
      continue;
    }
    if (word_cp(cp)) {
      std::size_t j = i + 1;
      while (j < n) {
        if (word_cp(cps[j].cp)) {
          ++j;
        } else if (text::is_apostrophe(cps[j].cp) && j + 1 < n && word_cp(cps[j + 1].cp)) {
          ++j;
        } else if ((cps[j].cp == '.' || cps[j].cp == ',') && text::is_digit(cps[j - 1].cp) && j + 1 < n &&
                   text::is_digit(cps[j + 1].cp)) {
          ++j;
        } else {
          break;
        }
      }
      ts.tokens.push_back({std::string(text.substr(cps[i].begin, cps[j - 1].end - cps[i].begin)), cps[i].begin, true});
      i = j;
      continue;
    }
    ts.tokens.push_back({std::string(text.substr(cps[i].begin, cps[i].end - cps[i].begin)), cps[i].begin, false});
    ++i;
  }

  const auto& toks = ts.tokens;
  const std::size_t m = toks.size();
  auto gap = [&](std::size_t a) {
    // Text between token a and token a+1.
    const std::size_t end = toks[a].offset + toks[a].text.size();
    return text.substr(end, toks[a + 1].offset - end);
  };
  std::size_t start = 0;
  std::size_t k = 0;
  while (k < m) {
    if (k + 1 < m && gap(k).find('\n') != std::string_view::npos) {
      ts.sentences.emplace_back(start, k + 1);
      start = k + 1;
      ++k;
      continue;
    }
    if (!is_terminator(toks[k].text)) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < m && is_terminator(toks[j + 1].text) && gap(j).empty()) ++j;
    while (j + 1 < m && is_closer(toks[j + 1].text) && gap(j).empty()) ++j;
    if (j + 1 >= m) break;
    const bool single_period = j == k && toks[k].text == ".";
    bool guarded = false;
    if (single_period && k > 0 && toks[k - 1].is_word && gap(k - 1).empty()) {
      const std::string prev = text::to_lower(toks[k - 1].text);
      guarded = is_abbreviation(prev) ||
                (text::letter_count(toks[k - 1].text) == 1 && text::is_capitalised(toks[k - 1].text));
    }
    std::size_t next = j + 1;
    while (next < m && is_opener(toks[next].text)) ++next;
    const bool capital_follows = next < m && toks[next].is_word && text::is_capitalised(toks[next].text);
    const std::string_view g = gap(j);
    const bool spaced = !g.empty();
    if (!guarded && spaced && capital_follows) {
      ts.sentences.emplace_back(start, j + 1);
      start = j + 1;
    } else if (g.find('\n') != std::string_view::npos) {
      ts.sentences.emplace_back(start, j + 1);
      start = j + 1;
    }
    k = j + 1;
  }
  if (start < m) ts.sentences.emplace_back(start, m);
  return ts;
}

namespace {

bool is_vowel_at(std::string_view w, std::size_t i) {
  const char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
  if (c == 'y') return i > 0;
  return false;
}

bool is_consonant_char(char c) {
  return c >= 'a' && c <= 'z' && c != 'a' && c != 'e' && c != 'i' && c != 'o' && c != 'u';
}

// Folds Latin-1 accented vowels onto plain vowels so the heuristic applies.
std::string fold_for_syllables(std::string_view word) {
  std::string out;
  for (std::size_t pos = 0; pos < word.size();) {
    char32_t cp = text::next_codepoint(word, pos);
    if (!text::is_letter(cp)) fail(ErrorKind::InvalidWord, "non-alphabetic word: " + std::string(word));
    if (cp < 0x80) {
      out += static_cast<char>(cp >= 'A' && cp <= 'Z' ? cp - 'A' + 'a' : cp);
    } else if ((cp >= 0xC0 && cp <= 0xC6) || (cp >= 0xE0 && cp <= 0xE6)) {
      out += 'a';
    } else if ((cp >= 0xC8 && cp <= 0xCB) || (cp >= 0xE8 && cp <= 0xEB)) {
      out += 'e';
    } else if ((cp >= 0xCC && cp <= 0xCF) || (cp >= 0xEC && cp <= 0xEF)) {
      out += 'i';
    } else if ((cp >= 0xD2 && cp <= 0xD8) || (cp >= 0xF2 && cp <= 0xF8)) {
      out += 'o';
    } else if ((cp >= 0xD9 && cp <= 0xDC) || (cp >= 0xF9 && cp <= 0xFC)) {
      out += 'u';
    } else {
      out += 'x';
    }
  }
  return out;
}

}  // namespace

std::size_t count_syllables(std::string_view word) {
  if (word.empty()) fail(ErrorKind::InvalidWord, "empty word");
  const std::string w = fold_for_syllables(word);
  std::size_t count = 0;
  bool in_group = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool v = is_vowel_at(w, i);
    if (v && !in_group) ++count;
    in_group = v;
  }
  const std::size_t n = w.size();
  if (count > 1 && n > 2) {
    if (w.ends_with('e')) {
      const bool consonant_le = w.ends_with("le") && n > 2 && is_consonant_char(w[n - 3]);
      const bool vowel_e = !is_consonant_char(w[n - 2]);
      if (!consonant_le && !vowel_e) --count;
    } else if (n > 3 && (w.ends_with("es") || w.ends_with("ed")) && is_consonant_char(w[n - 3])) {
      const char before = w[n - 3];
      bool voiced = false;
      if (w.ends_with("es")) {
        voiced = before == 's' || before == 'x' || before == 'z' || before == 'g' || before == 'c' ||
                 (before == 'h' && n > 4 && (w[n - 4] == 'c' || w[n - 4] == 's'));
      } else {
        voiced = before == 't' || before == 'd';
      }
      if (!voiced) --count;
    }
  }
  return std::max<std::size_t>(count, 1);
}

std::size_t token_syllables(std::string_view token) {
  std::string letters;
  for (std::size_t pos = 0; pos < token.size();) {
    const std::size_t b = pos;
    if (text::is_letter(text::next_codepoint(token, pos))) letters.append(token.substr(b, pos - b));
  }
  if (letters.empty()) return 1;
  return count_syllables(letters);
}

namespace {

const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"}, {"been", "be"},
      {"being", "be"}, {"has", "have"}, {"had", "have"}, {"having", "have"}, {"does", "do"},
      {"did", "do"}, {"done", "do"}, {"doing", "do"}, {"went", "go"}, {"gone", "go"},
      {"goes", "go"}, {"going", "go"}, {"said", "say"}, {"says", "say"}, {"made", "make"},
      {"took", "take"}, {"taken", "take"}, {"came", "come"}, {"saw", "see"}, {"seen", "see"},
      {"knew", "know"}, {"known", "know"}, {"got", "get"}, {"gotten", "get"}, {"gave", "give"},
      {"given", "give"}, {"found", "find"}, {"thought", "think"}, {"told", "tell"},
      {"became", "become"}, {"left", "leave"}, {"felt", "feel"}, {"brought", "bring"},
      {"began", "begin"}, {"begun", "begin"}, {"kept", "keep"}, {"held", "hold"},
      {"wrote", "write"}, {"written", "write"}, {"writing", "write"}, {"stood", "stand"},
      {"heard", "hear"}, {"meant", "mean"}, {"met", "meet"}, {"ran", "run"}, {"paid", "pay"},
      {"sat", "sit"}, {"spoke", "speak"}, {"spoken", "speak"}, {"led", "lead"}, {"grew", "grow"},
      {"grown", "grow"}, {"lost", "lose"}, {"fell", "fall"}, {"fallen", "fall"}, {"sent", "send"},
      {"built", "build"}, {"understood", "understand"}, {"drew", "draw"}, {"drawn", "draw"},
      {"broke", "break"}, {"broken", "break"}, {"spent", "spend"}, {"rose", "rise"},
      {"risen", "rise"}, {"drove", "drive"}, {"driven", "drive"}, {"bought", "buy"},
      {"wore", "wear"}, {"worn", "wear"}, {"chose", "choose"}, {"chosen", "choose"},
      {"ate", "eat"}, {"eaten", "eat"}, {"won", "win"}, {"fought", "fight"}, {"taught", "teach"},
      {"caught", "catch"}, {"sold", "sell"}, {"flew", "fly"}, {"flown", "fly"}, {"hid", "hide"},
      {"hidden", "hide"}, {"stole", "steal"}, {"stolen", "steal"}, {"threw", "throw"},
      {"thrown", "throw"}, {"using", "use"}, {"used", "use"}, {"men", "man"}, {"women", "woman"},
      {"children", "child"}, {"people", "person"}, {"mice", "mouse"}, {"feet", "foot"},
      {"teeth", "tooth"}, {"geese", "goose"}, {"lives", "life"}, {"wives", "wife"},
      {"knives", "knife"}, {"leaves", "leaf"}, {"wolves", "wolf"}, {"halves", "half"},
      {"better", "good"}, {"best", "good"}, {"worse", "bad"}, {"worst", "bad"},
      {"died", "die"}, {"lied", "lie"}, {"tied", "tie"}, {"data", "datum"}, {"criteria", "criterion"}, {"phenomena", "phenomenon"}};
  return table;
}

const std::unordered_set<std::string_view>& lemma_guards() {
  static const std::unordered_set<std::string_view> set = {
      "news", "always", "this", "his", "hers", "its", "ours", "yours", "theirs", "thus",
      "perhaps", "less", "unless", "across", "basis", "crisis", "analysis", "series",
      "species", "physics", "politics", "economics", "ethics", "bus", "gas", "yes", "us",
      "status", "virus", "campus", "bonus", "census", "focus", "versus", "various",
      "previous", "famous", "serious", "nervous", "dangerous", "religious", "obvious",
      "thing", "king", "ring", "sing", "spring", "string", "bring", "during", "morning",
      "evening", "nothing", "something", "anything", "everything", "ceiling", "wedding",
      "building", "meeting", "feeling", "being", "interesting", "bed", "red", "shed",
      "hundred", "indeed", "need", "speed", "seed", "feed", "bleed", "breed", "sled",
      "naked", "wicked", "sacred", "wretched", "beloved", "kindred", "whereas", "christmas",
      "texas", "kansas", "arkansas", "athens", "paris", "chaos", "atlas", "canvas", "alias"};
  return set;
}

bool has_vowel(std::string_view s) {
  return s.find_first_of("aeiouy") != std::string_view::npos;
}

std::string repair_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && is_consonant_char(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") || stem.ends_with('v') ||
      stem.ends_with("ur") || stem.ends_with("dg") || stem.ends_with("rc")) {
    return stem + "e";
  }
  if (n == 3 && is_consonant_char(stem[0]) && !is_consonant_char(stem[1]) && is_consonant_char(stem[2]) &&
      stem[2] != 'w' && stem[2] != 'x' && stem[2] != 'y') {
    return stem + "e";
  }
  return stem;
}

}  // namespace

std::string lemmatize(std::string_view token) {
  const std::string w = text::to_lower(token);
  if (auto it = irregular_forms().find(w); it != irregular_forms().end()) return std::string(it->second);
  if (w.size() <= 3 || lemma_guards().contains(w)) return w;
  if (w.find_first_not_of("abcdefghijklmnopqrstuvwxyz'") != std::string::npos) return w;
  const std::size_t n = w.size();

  if (w.ends_with("ies") && n > 4) return w.substr(0, n - 3) + "y";
  if (w.ends_with("ied") && n > 4) return w.substr(0, n - 3) + "y";
  if (w.ends_with("sses")) return w.substr(0, n - 2);
  if (w.ends_with("xes") || w.ends_with("ches") || w.ends_with("shes") || w.ends_with("zzes")) {
    return w.substr(0, n - 2);
  }
  if (w.ends_with("'s")) return w.substr(0, n - 2);
  if (w.ends_with('s')) {
    if (w.ends_with("ss") || w.ends_with("us") || w.ends_with("is")) return w;
    return w.substr(0, n - 1);
  }
  if (w.ends_with("ing") && n >= 5) {
    const std::string stem = w.substr(0, n - 3);
    if (stem.size() >= 2 && has_vowel(stem)) return repair_stem(stem);
    return w;
  }
  if (w.ends_with("ed") && n >= 4 && !w.ends_with("eed")) {
    const std::string stem = w.substr(0, n - 2);
    if (stem.size() >= 2 && has_vowel(stem)) return repair_stem(stem);
    return w;
  }
  return w;
}

}  // namespace fnkit
