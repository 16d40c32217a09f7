#include "fnkit/page_parse.hpp"

#include "fnkit/error.hpp"
#include "fnkit/text_util.hpp"
#include "fnkit/url.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <utility>

namespace fnkit {

namespace {

constexpr std::array<std::string_view, 42> kBlockTags = {
    "address", "article", "aside", "blockquote", "body", "br", "caption", "dd", "details",
    "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2",
    "h3", "h4", "h5", "h6", "head", "header", "hr", "html", "li", "main", "nav", "ol",
    "p", "pre", "section", "summary", "table", "tbody", "td", "th", "title", "tr", "ul"};

bool is_block(std::string_view tag) {
  return std::binary_search(kBlockTags.begin(), kBlockTags.end(), tag);
}

const std::map<std::string_view, char32_t>& named_entities() {
  static const std::map<std::string_view, char32_t> table = {
      {"amp", '&'},       {"lt", '<'},         {"gt", '>'},         {"quot", '"'},
      {"apos", '\''},     {"nbsp", 0xA0},      {"copy", 0xA9},      {"reg", 0xAE},
      {"trade", 0x2122},  {"hellip", 0x2026},  {"mdash", 0x2014},   {"ndash", 0x2013},
      {"lsquo", 0x2018},  {"rsquo", 0x2019},   {"ldquo", 0x201C},   {"rdquo", 0x201D},
      {"laquo", 0xAB},    {"raquo", 0xBB},     {"pound", 0xA3},     {"euro", 0x20AC},
      {"cent", 0xA2},     {"yen", 0xA5},       {"sect", 0xA7},      {"deg", 0xB0},
      {"middot", 0xB7},   {"bull", 0x2022},    {"times", 0xD7},     {"divide", 0xF7},
      {"eacute", 0xE9},   {"egrave", 0xE8},    {"aacute", 0xE1},    {"agrave", 0xE0},
      {"ouml", 0xF6},     {"uuml", 0xFC},      {"auml", 0xE4},      {"ccedil", 0xE7},
      {"ntilde", 0xF1},   {"iexcl", 0xA1},     {"iquest", 0xBF},    {"shy", 0xAD},
      {"thinsp", 0x2009}, {"ensp", 0x2002},    {"emsp", 0x2003},    {"zwnj", 0x200C},
      {"para", 0xB6},     {"frac12", 0xBD},    {"hearts", 0x2665},  {"dagger", 0x2020},
  };
  return table;
}

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
         c == ':' || c == '_';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

// Whitespace-normalising accumulator.
class TextSink {
 public:
  explicit TextSink(bool blocks_as_newlines) : newlines_(blocks_as_newlines) {}

  void append(std::string_view s) {
    for (std::size_t pos = 0; pos < s.size();) {
      const std::size_t start = pos;
      const char32_t cp = text::next_codepoint(s, pos);
      if (text::is_space(cp) || cp == 0x200C || cp == 0xAD) {
        pending_space_ = true;
        continue;
      }
      if (!out_.empty()) {
        if (pending_break_ && newlines_) {
          out_ += '\n';
        } else if (pending_space_ || pending_break_) {
          out_ += ' ';
        }
      }
      pending_space_ = pending_break_ = false;
      out_.append(s.substr(start, pos - start));
    }
  }

  void block_break() { pending_break_ = true; }

  const std::string& str() const { return out_; }

 private:
  std::string out_;
  bool newlines_;
  bool pending_space_ = false;
  bool pending_break_ = false;
};

struct Tag {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  bool closing = false;

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

class HtmlScanner {
 public:
  HtmlScanner(std::string_view doc, std::string_view base_url) : doc_(doc) {
    base_ = parse_absolute_url(base_url);
  }

  ParsedPage run() {
    while (pos_ < doc_.size()) {
      const auto lt = doc_.find('<', pos_);
      if (lt == std::string_view::npos) {
        emit_text(doc_.substr(pos_));
        break;
      }
      if (lt > pos_) emit_text(doc_.substr(pos_, lt - pos_));
      pos_ = lt;
      scan_markup();
    }
    close_anchor();
    page_.body_text = seen_body_ ? body_.str() : whole_.str();
    return std::move(page_);
  }

 private:
  void emit_text(std::string_view raw) {
    const std::string decoded = decode_entities(raw);
    whole_.append(decoded);
    if (seen_body_) body_.append(decoded);
    if (anchor_) anchor_->second.append(decoded);
  }

  void scan_markup() {
    const std::string_view rest = doc_.substr(pos_);
    if (rest.starts_with("<!--")) {
      const auto end = doc_.find("-->", pos_ + 4);
      pos_ = end == std::string_view::npos ? doc_.size() : end + 3;
      return;
    }
    if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
      const auto end = doc_.find('>', pos_);
      pos_ = end == std::string_view::npos ? doc_.size() : end + 1;
      return;
    }
    const bool closing = rest.size() >= 2 && rest[1] == '/';
    const std::size_t name_start = pos_ + (closing ? 2 : 1);
    if (name_start >= doc_.size() || !std::isalpha(static_cast<unsigned char>(doc_[name_start]))) {
      // Stray '<' is literal text.
      emit_text(doc_.substr(pos_, 1));
      ++pos_;
      return;
    }
    Tag tag = read_tag(closing);
    if (tag.closing) {
      handle_end(tag.name);
    } else {
      handle_start(tag);
    }
  }

  Tag read_tag(bool closing) {
    Tag tag;
    tag.closing = closing;
    std::size_t p = pos_ + (closing ? 2 : 1);
    const std::size_t n = doc_.size();
    const std::size_t name_start = p;
    while (p < n && is_name_char(doc_[p])) ++p;
    tag.name = text::to_lower(doc_.substr(name_start, p - name_start));
    while (p < n && doc_[p] != '>') {
      if (is_ws(doc_[p]) || doc_[p] == '/') {
        ++p;
        continue;
      }
      // Some broken markup never closes a tag; a '<' starts the next one.
      if (doc_[p] == '<') break;
      const std::size_t key_start = p;
      while (p < n && !is_ws(doc_[p]) && doc_[p] != '=' && doc_[p] != '>' && doc_[p] != '<' &&
             !(doc_[p] == '/' && p + 1 < n && doc_[p + 1] == '>')) {
        ++p;
      }
      std::string key = text::to_lower(doc_.substr(key_start, p - key_start));
      while (p < n && is_ws(doc_[p])) ++p;
      std::string value;
      if (p < n && doc_[p] == '=') {
        ++p;
        while (p < n && is_ws(doc_[p])) ++p;
        if (p < n && (doc_[p] == '"' || doc_[p] == '\'')) {
          const char quote = doc_[p++];
          const auto end = doc_.find(quote, p);
          const std::size_t stop = end == std::string_view::npos ? n : end;
          value = std::string(doc_.substr(p, stop - p));
          p = end == std::string_view::npos ? n : end + 1;
        } else {
          const std::size_t v_start = p;
          while (p < n && !is_ws(doc_[p]) && doc_[p] != '>') ++p;
          value = std::string(doc_.substr(v_start, p - v_start));
        }
      }
      if (!key.empty() && !tag.attr(key)) tag.attrs.emplace_back(std::move(key), decode_entities(value));
    }
    pos_ = p < n && doc_[p] == '>' ? p + 1 : p;
    return tag;
  }

  void handle_start(const Tag& tag) {
    ElementInfo info;
    info.tag = tag.name;
    if (const auto* cls = tag.attr("class")) {
      std::size_t i = 0;
      while (i < cls->size()) {
        while (i < cls->size() && is_ws((*cls)[i])) ++i;
        const std::size_t s = i;
        while (i < cls->size() && !is_ws((*cls)[i])) ++i;
        if (i > s) info.classes.insert(cls->substr(s, i - s));
      }
    }
    if (const auto* id = tag.attr("id"); id && !id->empty()) info.id = *id;
    page_.element_inventory.push_back(std::move(info));

    if (tag.name == "body") seen_body_ = true;
    if (is_block(tag.name)) break_all();

    if (tag.name == "base") {
      if (const auto* href = tag.attr("href"); href && base_) {
        try {
          base_ = resolve_url(*href, *base_);
        } catch (const Error&) {
        }
      }
    } else if (tag.name == "a") {
      close_anchor();
      if (const auto* href = tag.attr("href")) anchor_.emplace(*href, TextSink(false));
    } else if (tag.name == "script" || tag.name == "img" || tag.name == "iframe") {
      if (const auto* src = tag.attr("src"); src && !text::trim(*src).empty()) add_resource(*src);
    }

    if (tag.name == "script" || tag.name == "style") skip_raw_text(tag.name);
  }

  void handle_end(const std::string& name) {
    if (name == "a") close_anchor();
    if (is_block(name)) break_all();
  }

  void break_all() {
    whole_.block_break();
    body_.block_break();
    if (anchor_) anchor_->second.block_break();
  }

  void close_anchor() {
    if (!anchor_) return;
    page_.hrefs.push_back({text::trim(anchor_->first), anchor_->second.str()});
    anchor_.reset();
  }

  void add_resource(const std::string& src) {
    if (base_) {
      try {
        page_.resource_urls.push_back(resolve_url(src, *base_).str());
        return;
      } catch (const Error&) {
      }
    }
    page_.resource_urls.push_back(text::trim(src));
  }

  void skip_raw_text(const std::string& name) {
    const std::string needle = "</" + name;
    std::size_t p = pos_;
    while (true) {
      const auto lt = doc_.find("</", p);
      if (lt == std::string_view::npos) {
        pos_ = doc_.size();
        return;
      }
      if (text::starts_with_ci(doc_.substr(lt), needle)) {
        const auto gt = doc_.find('>', lt);
        pos_ = gt == std::string_view::npos ? doc_.size() : gt + 1;
        return;
      }
      p = lt + 2;
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
  std::optional<Url> base_;
  ParsedPage page_;
  TextSink whole_{true};
  TextSink body_{true};
  bool seen_body_ = false;
  std::optional<std::pair<std::string, TextSink>> anchor_;
};

}  // namespace

std::string decode_entities(std::string_view s) {
  if (s.find('&') == std::string_view::npos) return std::string(s);
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    const auto semi = s.find(';', i + 1);
    const std::size_t limit = std::min<std::size_t>(s.size(), i + 12);
    if (i + 1 < s.size() && s[i + 1] == '#') {
      std::size_t p = i + 2;
      const bool hex = p < s.size() && (s[p] == 'x' || s[p] == 'X');
      if (hex) ++p;
      std::uint32_t cp = 0;
      const std::size_t digits_start = p;
      while (p < s.size() && p < i + 12 &&
             (hex ? std::isxdigit(static_cast<unsigned char>(s[p])) : std::isdigit(static_cast<unsigned char>(s[p])))) {
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(s[p])) ? s[p] - '0' : (std::tolower(s[p]) - 'a' + 10));
        ++p;
      }
      if (p > digits_start) {
        if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
        text::append_utf8(out, cp);
        i = p < s.size() && s[p] == ';' ? p + 1 : p;
        continue;
      }
    } else if (semi != std::string_view::npos && semi < limit) {
      const auto name = s.substr(i + 1, semi - i - 1);
      const auto& table = named_entities();
      if (auto it = table.find(name); it != table.end()) {
        text::append_utf8(out, it->second);
        i = semi + 1;
        continue;
      }
    } else {
      // Legacy forms without the terminating semicolon.
      bool matched = false;
      for (std::string_view legacy : {"amp", "lt", "gt", "quot", "nbsp"}) {
        if (s.substr(i + 1).starts_with(legacy)) {
          text::append_utf8(out, named_entities().at(legacy));
          i += 1 + legacy.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out += s[i++];
  }
  return out;
}

ParsedPage parse_page(std::string_view html_bytes, std::string_view base_url) {
  if (html_bytes.empty()) fail(ErrorKind::EmptyDocument, "empty HTML document");
  const std::string doc = text::decode_utf8_lossy(html_bytes);
  return HtmlScanner(doc, base_url).run();
}

}  // namespace fnkit
