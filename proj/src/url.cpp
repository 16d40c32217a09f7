#include "fnkit/url.hpp"

#include "fnkit/error.hpp"
#include "fnkit/text_util.hpp"

#include <vector>

namespace fnkit {

namespace {

struct RawParts {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
};

bool valid_scheme(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!alpha(s[0])) return false;
  for (char c : s) {
    if (!alpha(c) && !(c >= '0' && c <= '9') && c != '+' && c != '-' && c != '.') return false;
  }
  return true;
}

// Percent-encodes bytes that cannot appear literally (spaces, controls,
// non-ASCII). Crawled hrefs routinely contain them.
std::string escape_loose(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c <= 0x20 || c >= 0x7F || c == '"' || c == '<' || c == '>' || c == '\\' || c == '^' ||
        c == '`' || c == '{' || c == '|' || c == '}') {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

RawParts split_reference(std::string_view s) {
  RawParts parts;
  if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  const auto colon = s.find(':');
  const auto first_delim = s.find_first_of("/?#");
  if (colon != std::string_view::npos && (first_delim == std::string_view::npos || colon < first_delim) &&
      valid_scheme(s.substr(0, colon))) {
    parts.scheme = text::to_lower(s.substr(0, colon));
    s = s.substr(colon + 1);
  }
  if (s.starts_with("//")) {
    s = s.substr(2);
    const auto end = s.find_first_of("/?");
    parts.authority = std::string(s.substr(0, end));
    s = end == std::string_view::npos ? std::string_view{} : s.substr(end);
  }
  if (const auto q = s.find('?'); q != std::string_view::npos) {
    parts.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  parts.path = std::string(s);
  return parts;
}

std::string remove_dot_segments(std::string_view input) {
  std::vector<std::string_view> out;
  const bool absolute = input.starts_with('/');
  std::size_t pos = absolute ? 1 : 0;
  bool trailing_slash = false;
  while (pos <= input.size()) {
    const auto next = input.find('/', pos);
    const auto seg = input.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    trailing_slash = false;
    if (seg == "..") {
      if (!out.empty()) out.pop_back();
      trailing_slash = true;
    } else if (seg == ".") {
      trailing_slash = true;
    } else {
      out.push_back(seg);
    }
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  std::string result = absolute ? "/" : "";
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0) result += '/';
    result += out[i];
  }
  if (trailing_slash && !result.ends_with('/')) result += '/';
  return result;
}

bool parse_authority(std::string_view authority, Url& url) {
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  std::string_view host = authority;
  std::string_view port;
  if (authority.starts_with('[')) {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return false;
    host = authority.substr(0, close + 1);
    const auto rest = authority.substr(close + 1);
    if (!rest.empty()) {
      if (rest[0] != ':') return false;
      port = rest.substr(1);
    }
  } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (host.empty()) return false;
  for (char c : host) {
    const auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || c == '/' || c == '\\' || c == '<' || c == '>' || c == '"' || c == '%') return false;
  }
  for (char c : port) {
    if (c < '0' || c > '9') return false;
  }
  url.host = text::to_lower(host);
  while (url.host.ends_with('.')) url.host.pop_back();
  if (url.host.empty()) return false;
  if ((url.scheme == "http" && port == "80") || (url.scheme == "https" && port == "443")) port = {};
  url.port = std::string(port);
  return true;
}

std::string merge_paths(const Url& base, std::string_view ref_path) {
  const auto slash = base.path.rfind('/');
  if (slash == std::string::npos) return "/" + std::string(ref_path);
  return base.path.substr(0, slash + 1) + std::string(ref_path);
}

}  // namespace

std::string Url::str() const {
  std::string out = scheme + "://" + host;
  if (!port.empty()) out += ":" + port;
  out += path.empty() ? "/" : path;
  if (query) out += "?" + *query;
  return out;
}

std::optional<std::string> url_scheme(std::string_view raw) {
  const auto parts = split_reference(text::trim(raw));
  return parts.scheme;
}

std::optional<Url> parse_absolute_url(std::string_view raw) {
  const std::string trimmed = text::trim(raw);
  const auto parts = split_reference(trimmed);
  if (!parts.scheme || (*parts.scheme != "http" && *parts.scheme != "https")) return std::nullopt;
  if (!parts.authority) return std::nullopt;
  Url url;
  url.scheme = *parts.scheme;
  if (!parse_authority(*parts.authority, url)) return std::nullopt;
  url.path = remove_dot_segments(escape_loose(parts.path.empty() ? "/" : parts.path));
  if (url.path.empty()) url.path = "/";
  if (parts.query) url.query = escape_loose(*parts.query);
  return url;
}

Url resolve_url(std::string_view raw, const Url& base) {
  const std::string trimmed = text::trim(raw);
  const auto ref = split_reference(trimmed);
  if (ref.scheme) {
    if (*ref.scheme != "http" && *ref.scheme != "https") {
      fail(ErrorKind::UrlError, "non-fetchable scheme '" + *ref.scheme + "' in " + trimmed);
    }
    auto url = parse_absolute_url(trimmed);
    if (!url) fail(ErrorKind::UrlError, "unparseable URL: " + trimmed);
    return *url;
  }
  Url target;
  target.scheme = base.scheme;
  if (ref.authority) {
    if (!parse_authority(*ref.authority, target)) fail(ErrorKind::UrlError, "bad authority in " + trimmed);
    target.path = remove_dot_segments(escape_loose(ref.path.empty() ? "/" : ref.path));
    if (ref.query) target.query = escape_loose(*ref.query);
  } else {
    target.host = base.host;
    target.port = base.port;
    if (ref.path.empty()) {
      target.path = base.path;
      target.query = ref.query ? std::optional(escape_loose(*ref.query)) : base.query;
    } else {
      const std::string path = escape_loose(ref.path);
      target.path = path.starts_with('/') ? remove_dot_segments(path) : remove_dot_segments(merge_paths(base, path));
      if (ref.query) target.query = escape_loose(*ref.query);
    }
  }
  if (target.path.empty()) target.path = "/";
  return target;
}

std::string resolve_url(std::string_view raw, std::string_view base) {
  const auto base_url = parse_absolute_url(base);
  if (!base_url) fail(ErrorKind::UrlError, "base URL is not absolute http(s): " + std::string(base));
  return resolve_url(raw, *base_url).str();
}

}  // namespace fnkit
