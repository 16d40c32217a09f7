#include "fnkit/monetise.hpp"

#include "fnkit/error.hpp"
#include "fnkit/text_util.hpp"
#include "fnkit/url.hpp"

#include <fstream>
#include <sstream>

namespace fnkit {

namespace {

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
}

bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

bool is_tag_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
  }
  return true;
}

// Supported selector forms: .class, #id, tag.class.
bool supported_selector(std::string_view sel) {
  if (sel.starts_with('.')) return is_ident(sel.substr(1));
  if (sel.starts_with('#')) return is_ident(sel.substr(1));
  const auto dot = sel.find('.');
  if (dot == std::string_view::npos) return false;
  return is_tag_name(sel.substr(0, dot)) && is_ident(sel.substr(dot + 1));
}

bool is_separator(char c) {
  return !((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.' || c == '%');
}

// Glob match of p[pi..] against u[ui..] with `*` and `^`.
bool glob_match(std::string_view p, std::size_t pi, std::string_view u, std::size_t ui, bool end_anchor) {
  while (pi < p.size()) {
    const char pc = p[pi];
    if (pc == '*') {
      while (pi < p.size() && p[pi] == '*') ++pi;
      if (pi == p.size()) return true;
      for (std::size_t k = ui; k <= u.size(); ++k) {
        if (glob_match(p, pi, u, k, end_anchor)) return true;
      }
      return false;
    }
    if (pc == '^') {
      if (ui == u.size()) {
        ++pi;
        continue;  // separator matches end of address
      }
      if (!is_separator(u[ui])) return false;
      ++pi, ++ui;
      continue;
    }
    if (ui >= u.size() || u[ui] != pc) return false;
    ++pi, ++ui;
  }
  return !end_anchor || ui == u.size();
}

std::string longest_literal(std::string_view p) {
  std::string best;
  std::string cur;
  for (char c : p) {
    if (c == '*' || c == '^' || c == '|') {
      if (cur.size() > best.size()) best = cur;
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (cur.size() > best.size()) best = cur;
  return best;
}

// Host part of a lower-cased URL: [begin, end).
std::pair<std::size_t, std::size_t> host_span(std::string_view u) {
  const auto sep = u.find("://");
  const std::size_t begin = sep == std::string_view::npos ? 0 : sep + 3;
  auto end = u.find_first_of("/?#:", begin);
  if (end == std::string_view::npos) end = u.size();
  return {begin, end};
}

// Pure "||domain^" with a plain host name.
std::optional<std::string> pure_domain_anchor(std::string_view pattern) {
  if (!pattern.starts_with("||") || !pattern.ends_with('^')) return std::nullopt;
  const auto body = pattern.substr(2, pattern.size() - 3);
  if (body.empty()) return std::nullopt;
  for (char c : body) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.')) return std::nullopt;
  }
  return std::string(body);
}

}  // namespace

FilterList parse_filter_list(std::string_view text) {
  FilterList out;
  auto& sum = out.summary;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string raw = text::trim(text.substr(pos, end - pos));
    const bool last = end == text.size();
    pos = end + 1;
    if (raw.empty()) {
      if (!last) ++sum.blank;
      if (last) break;
      continue;
    }
    std::string_view line = raw;
    if (line.starts_with('!') || (line.starts_with('[') && line.ends_with(']'))) {
      ++sum.comments;
    } else if (line.starts_with("@@") || line.find("#@#") != std::string_view::npos ||
               line.find("#@?#") != std::string_view::npos || line.find("#@$#") != std::string_view::npos) {
      ++sum.exceptions;
    } else if (const auto hh = line.find("##"); hh != std::string_view::npos) {
      const auto selector = line.substr(hh + 2);
      if (hh == 0 && supported_selector(selector)) {
        out.rules.push_back({RuleKind::ElementHide, std::string(selector), {}, raw});
        ++sum.accepted;
      } else {
        ++sum.unsupported;
      }
    } else if (line.find("#?#") != std::string_view::npos || line.find("#$#") != std::string_view::npos ||
               line.find('$') != std::string_view::npos ||
               (line.size() > 1 && line.starts_with('/') && line.ends_with('/'))) {
      ++sum.unsupported;
    } else {
      const std::string pattern = text::to_lower(line);
      if (longest_literal(pattern).empty()) {
        ++sum.unsupported;
      } else {
        out.rules.push_back({RuleKind::UrlBlock, {}, pattern, raw});
        ++sum.accepted;
      }
    }
    if (last) break;
  }
  return out;
}

FilterList load_filter_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open filter list " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_filter_list(buf.str());
}

std::string serialise_filter_list(const std::vector<FilterRule>& rules) {
  std::string out;
  for (const auto& r : rules) {
    out += r.kind == RuleKind::ElementHide ? "##" + r.selector : r.pattern;
    out += '\n';
  }
  return out;
}

bool url_pattern_matches(std::string_view raw_pattern, std::string_view raw_url) {
  const std::string pattern = text::to_lower(raw_pattern);
  const std::string url = text::to_lower(raw_url);
  std::string_view p = pattern;
  const std::string_view u = url;

  bool domain_anchor = false;
  bool start_anchor = false;
  bool end_anchor = false;
  if (p.starts_with("||")) {
    domain_anchor = true;
    p.remove_prefix(2);
  } else if (p.starts_with('|')) {
    start_anchor = true;
    p.remove_prefix(1);
  }
  if (p.ends_with('|')) {
    end_anchor = true;
    p.remove_suffix(1);
  }

  if (domain_anchor) {
    const auto [hb, he] = host_span(u);
    for (std::size_t s = hb; s < he; ++s) {
      if ((s == hb || u[s - 1] == '.') && glob_match(p, 0, u, s, end_anchor)) return true;
    }
    return false;
  }
  if (start_anchor) return glob_match(p, 0, u, 0, end_anchor);
  for (std::size_t s = 0; s <= u.size(); ++s) {
    if (glob_match(p, 0, u, s, end_anchor)) return true;
  }
  return false;
}

AdMatcher::AdMatcher(const std::vector<FilterRule>& rules) {
  for (const auto& r : rules) {
    if (r.kind == RuleKind::ElementHide) {
      const std::string_view sel = r.selector;
      if (sel.starts_with('.')) {
        classes_.insert(std::string(sel.substr(1)));
      } else if (sel.starts_with('#')) {
        ids_.insert(std::string(sel.substr(1)));
      } else {
        const auto dot = sel.find('.');
        tag_classes_[std::string(sel.substr(dot + 1))].insert(text::to_lower(sel.substr(0, dot)));
      }
    } else if (auto domain = pure_domain_anchor(r.pattern)) {
      blocked_domains_.insert(*domain);
    } else {
      patterns_.push_back({r.pattern, longest_literal(r.pattern)});
    }
  }
}

bool AdMatcher::matches_element(const ElementInfo& element) const {
  if (element.id && ids_.contains(*element.id)) return true;
  for (const auto& cls : element.classes) {
    if (classes_.contains(cls)) return true;
    if (auto it = tag_classes_.find(cls); it != tag_classes_.end() && it->second.contains(element.tag)) return true;
  }
  return false;
}

bool AdMatcher::matches_url(std::string_view raw_url) const {
  const std::string url = text::to_lower(raw_url);
  if (!blocked_domains_.empty()) {
    if (auto parsed = parse_absolute_url(url)) {
      std::string_view host = parsed->host;
      while (true) {
        if (blocked_domains_.contains(std::string(host))) return true;
        const auto dot = host.find('.');
        if (dot == std::string_view::npos) break;
        host.remove_prefix(dot + 1);
      }
    }
  }
  for (const auto& p : patterns_) {
    if (url.find(p.needle) == std::string::npos) continue;
    if (url_pattern_matches(p.text, url)) return true;
  }
  return false;
}

std::size_t count_ads(const ParsedPage& page, const AdMatcher& matcher) {
  std::size_t n = 0;
  for (const auto& el : page.element_inventory) {
    if (matcher.matches_element(el)) ++n;
  }
  for (const auto& url : page.resource_urls) {
    if (matcher.matches_url(url)) ++n;
  }
  return n;
}

std::size_t count_ads(const ParsedPage& page, const std::vector<FilterRule>& rules) {
  return count_ads(page, AdMatcher(rules));
}

namespace {

// Host of an href that points off-page; nullopt for relative or non-http(s).
std::optional<std::string> absolute_href_host(std::string_view href) {
  const std::string trimmed = text::trim(href);
  if (trimmed.starts_with("//")) {
    if (auto u = parse_absolute_url("https:" + trimmed)) return u->host;
    return std::nullopt;
  }
  const auto scheme = url_scheme(trimmed);
  if (!scheme || (*scheme != "http" && *scheme != "https")) return std::nullopt;
  if (auto u = parse_absolute_url(trimmed)) return u->host;
  return std::nullopt;
}

}  // namespace

std::size_t count_external_links(const ParsedPage& page, std::string_view host_url, const PublicSuffixList& psl) {
  const auto host = parse_absolute_url(host_url);
  if (!host) fail(ErrorKind::UrlError, "host URL is not absolute: " + std::string(host_url));
  const std::string own = psl.site_key(host->host);
  std::size_t n = 0;
  for (const auto& link : page.hrefs) {
    const auto h = absolute_href_host(link.href);
    if (h && psl.site_key(*h) != own) ++n;
  }
  return n;
}

SocialLinkCounts count_social_links(const ParsedPage& page, const PublicSuffixList& psl) {
  SocialLinkCounts counts;
  for (const auto& link : page.hrefs) {
    const auto h = absolute_href_host(link.href);
    if (!h) continue;
    const std::string site = psl.site_key(*h);
    if (site == "facebook.com") {
      ++counts.fb;
    } else if (site == "twitter.com" || site == "x.com") {
      ++counts.twit;
    }
  }
  return counts;
}

MonetisationFeatures compute_monetisation(const ParsedPage& page, std::string_view host_url,
                                          const AdMatcher& matcher, const PublicSuffixList& psl) {
  MonetisationFeatures m;
  m.ads = count_ads(page, matcher);
  m.ext_total = count_external_links(page, host_url, psl);
  const auto social = count_social_links(page, psl);
  m.fb = social.fb;
  m.twit = social.twit;
  return m;
}

}  // namespace fnkit
