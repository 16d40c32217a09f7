#include "fnkit/public_suffix.hpp"

#include "fnkit/error.hpp"
#include "fnkit/text_util.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace fnkit {

namespace {

std::string normalise_host(std::string_view host) {
  std::string h = text::to_lower(text::trim(host));
  while (h.ends_with('.')) h.pop_back();
  while (h.starts_with('.')) h.erase(h.begin());
  return h;
}

bool is_ip_literal(std::string_view host) {
  if (host.find(':') != std::string_view::npos || host.starts_with('[')) return true;
  if (host.empty()) return false;
  for (char c : host) {
    if (!(c >= '0' && c <= '9') && c != '.') return false;
  }
  return true;
}

// Label start offsets, left to right.
std::vector<std::size_t> label_starts(std::string_view host) {
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < host.size(); ++i) {
    if (host[i] == '.') starts.push_back(i + 1);
  }
  return starts;
}

}  // namespace

PublicSuffixList PublicSuffixList::parse(std::string_view list_text) {
  PublicSuffixList psl;
  std::size_t pos = 0;
  while (pos < list_text.size()) {
    auto end = list_text.find('\n', pos);
    if (end == std::string_view::npos) end = list_text.size();
    std::string_view line = list_text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto ws = line.find_first_of(" \t\r"); ws != std::string_view::npos) line = line.substr(0, ws);
    if (line.empty() || line.starts_with("//")) continue;
    std::string rule = text::to_lower(line);
    if (rule.starts_with('!')) {
      psl.exceptions_.insert(rule.substr(1));
    } else if (rule.starts_with("*.")) {
      psl.wildcards_.insert(rule.substr(2));
    } else {
      psl.rules_.insert(std::move(rule));
    }
  }
  return psl;
}

PublicSuffixList PublicSuffixList::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open public suffix list " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string PublicSuffixList::public_suffix(std::string_view raw_host) const {
  const std::string host = normalise_host(raw_host);
  if (host.empty()) return host;
  const auto starts = label_starts(host);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::string_view suffix = std::string_view(host).substr(starts[i]);
    const std::string key(suffix);
    if (exceptions_.contains(key)) {
      // An exception's public suffix drops its leftmost label.
      return i + 1 < starts.size() ? host.substr(starts[i + 1]) : key;
    }
    if (rules_.contains(key)) return key;
    if (i + 1 < starts.size() && wildcards_.contains(host.substr(starts[i + 1]))) return key;
  }
  // Default rule "*": the last label.
  return host.substr(starts.back());
}

std::optional<std::string> PublicSuffixList::registered_domain(std::string_view raw_host) const {
  const std::string host = normalise_host(raw_host);
  if (host.empty() || is_ip_literal(host)) return std::nullopt;
  const std::string suffix = public_suffix(host);
  if (suffix.size() >= host.size()) return std::nullopt;
  // One more label to the left of the suffix.
  const std::string_view head = std::string_view(host).substr(0, host.size() - suffix.size() - 1);
  const auto dot = head.rfind('.');
  const std::string_view label = dot == std::string_view::npos ? head : head.substr(dot + 1);
  if (label.empty()) return std::nullopt;
  return std::string(label) + "." + suffix;
}

std::string PublicSuffixList::site_key(std::string_view host) const {
  if (auto reg = registered_domain(host)) return *reg;
  return normalise_host(host);
}

}  // namespace fnkit
