#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fnkit::text {

// Lossy UTF-8 validation: invalid or truncated sequences become U+FFFD.
std::string decode_utf8_lossy(std::span<const std::uint8_t> bytes);
std::string decode_utf8_lossy(std::string_view bytes);

// Decodes one code point at `pos`, advancing `pos`. Input must be valid UTF-8
// (as produced by decode_utf8_lossy); stray bytes decode as U+FFFD.
char32_t next_codepoint(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
bool is_apostrophe(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Letters in a word token (code points, not bytes).
std::size_t letter_count(std::string_view word);
// True when every letter is upper case and there are at least two letters.
bool is_all_caps_word(std::string_view word);
bool is_capitalised(std::string_view word);
bool is_numeric_token(std::string_view word);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view encoded);

}  // namespace fnkit::text
