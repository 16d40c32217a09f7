#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace fnkit {

// Public-suffix rule set (normal, wildcard and exception rules) with
// registered-domain (eTLD+1) lookup.
class PublicSuffixList {
 public:
  static PublicSuffixList parse(std::string_view list_text);
  static PublicSuffixList load(const std::filesystem::path& path);

  // Public suffix of `host` under the prevailing rule (default rule "*").
  std::string public_suffix(std::string_view host) const;

  // eTLD+1 of `host`; nullopt when the host is itself a public suffix, is an
  // IP literal, or is empty.
  std::optional<std::string> registered_domain(std::string_view host) const;

  // registered_domain(host), falling back to the normalised host itself.
  std::string site_key(std::string_view host) const;

  std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // "*.ck" stored as "ck"
  std::unordered_set<std::string> exceptions_;  // "!www.ck" stored as "www.ck"
};

}  // namespace fnkit
