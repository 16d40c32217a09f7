#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fnkit {

// An absolute http(s) URL split into components. Fragments are never kept.
struct Url {
  std::string scheme;  // lower case, "http" or "https"
  std::string host;    // lower case, no brackets stripped for IPv6
  std::string port;    // empty when default / absent
  std::string path;    // always starts with '/'
  std::optional<std::string> query;

  std::string str() const;
};

// Parses an absolute http(s) URL; nullopt for anything else.
std::optional<Url> parse_absolute_url(std::string_view raw);

// Resolves `raw` against `base` (RFC 3986 section 5.2) and strips the
// fragment. Throws Error(UrlError) for unparseable input or non-fetchable
// schemes (mailto:, javascript:, data:, ...).
std::string resolve_url(std::string_view raw, std::string_view base);
Url resolve_url(std::string_view raw, const Url& base);

// Lower-cased scheme of `raw` if it has one ("mailto", "https", ...).
std::optional<std::string> url_scheme(std::string_view raw);

}  // namespace fnkit
