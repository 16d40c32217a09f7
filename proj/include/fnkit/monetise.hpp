#pragma once

#include "fnkit/page_parse.hpp"
#include "fnkit/public_suffix.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fnkit {

enum class RuleKind { ElementHide, UrlBlock };

// One supported adblock rule. Element-hide rules carry a selector of the form
// `.class`, `#id` or `tag.class`; URL-block rules carry an ABP-style pattern
// (`||domain^` anchors, `|` anchors, `*` and `^` wildcards, or a substring).
struct FilterRule {
  RuleKind kind = RuleKind::UrlBlock;
  std::string selector;
  std::string pattern;
  std::string source_line;

  bool same_rule(const FilterRule& other) const {
    return kind == other.kind && selector == other.selector && pattern == other.pattern;
  }
};

struct FilterParseSummary {
  std::size_t accepted = 0;
  std::size_t comments = 0;
  std::size_t exceptions = 0;
  std::size_t unsupported = 0;
  std::size_t blank = 0;
};

struct FilterList {
  std::vector<FilterRule> rules;
  FilterParseSummary summary;
};

// Parses an EasyList-compatible list. Comments (`!`, `[...]` headers),
// exceptions (`@@`, `#@#`), `$`-option rules, domain-restricted or complex
// selectors, and regex rules are skipped and tallied in the summary.
FilterList parse_filter_list(std::string_view text);
FilterList load_filter_list(const std::string& path);

// Canonical text form: one rule per line.
std::string serialise_filter_list(const std::vector<FilterRule>& rules);

// True if the URL-block pattern matches `url` (case-insensitive).
bool url_pattern_matches(std::string_view pattern, std::string_view url);

// Rules compiled into lookup tables for counting.
class AdMatcher {
 public:
  explicit AdMatcher(const std::vector<FilterRule>& rules);

  bool matches_element(const ElementInfo& element) const;
  bool matches_url(std::string_view url) const;

 private:
  std::unordered_set<std::string> classes_;
  std::unordered_set<std::string> ids_;
  std::unordered_map<std::string, std::unordered_set<std::string>> tag_classes_;  // class -> tags
  std::unordered_set<std::string> blocked_domains_;  // pure `||domain^` rules
  struct Pattern {
    std::string text;
    std::string needle;  // longest literal run, lower case
  };
  std::vector<Pattern> patterns_;
};

struct MonetisationFeatures {
  std::size_t ads = 0;
  std::size_t ext_total = 0;
  std::size_t fb = 0;
  std::size_t twit = 0;

  bool operator==(const MonetisationFeatures&) const = default;
};

// Elements matched by at least one hide rule plus resource URLs matched by at
// least one block rule; each element/URL counts once.
std::size_t count_ads(const ParsedPage& page, const AdMatcher& matcher);
std::size_t count_ads(const ParsedPage& page, const std::vector<FilterRule>& rules);

// Absolute http(s) hrefs whose registered domain differs from the host's.
// Relative hrefs are internal; other schemes are ignored.
std::size_t count_external_links(const ParsedPage& page, std::string_view host_url,
                                 const PublicSuffixList& psl);

struct SocialLinkCounts {
  std::size_t fb = 0;
  std::size_t twit = 0;
};

// facebook.com links, and twitter.com / x.com links, by registered domain.
SocialLinkCounts count_social_links(const ParsedPage& page, const PublicSuffixList& psl);

MonetisationFeatures compute_monetisation(const ParsedPage& page, std::string_view host_url,
                                          const AdMatcher& matcher, const PublicSuffixList& psl);

}  // namespace fnkit
