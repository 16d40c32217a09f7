#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fnkit {

struct Hyperlink {
  std::string href;  // raw attribute value (absolute or relative)
  std::string anchor_text;

  bool operator==(const Hyperlink&) const = default;
};

struct ElementInfo {
  std::string tag;  // lower case, never empty
  std::set<std::string> classes;
  std::optional<std::string> id;

  bool operator==(const ElementInfo&) const = default;
};

struct ParsedPage {
  // Text nodes under <body> in document order (whole document when there is
  // no <body>), script/style excluded. Runs of whitespace collapse to one
  // space; block-level element boundaries become a single '\n'.
  std::string body_text;
  std::vector<Hyperlink> hrefs;
  // src attributes of script/img/iframe, resolved against the base URL when
  // possible, otherwise kept verbatim.
  std::vector<std::string> resource_urls;
  std::vector<ElementInfo> element_inventory;

  bool operator==(const ParsedPage&) const = default;
};

// Lenient parse: malformed markup is repaired rather than rejected.
// Throws Error(EmptyDocument) for empty input.
ParsedPage parse_page(std::string_view html_bytes, std::string_view base_url);

// Decodes character references (&amp;, &#39;, &#x27;, &nbsp; ...).
std::string decode_entities(std::string_view s);

}  // namespace fnkit
