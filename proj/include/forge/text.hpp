#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace forge::text {

// 64-bit FNV-1a over raw UTF-8 bytes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

bool is_space_cp(char32_t cp);

// Lenient UTF-8 decode: invalid sequences become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view cps);

// Removes Unicode whitespace (and a leading BOM) from both ends.
std::string trim(std::string_view s);
std::string trim_right(std::string_view s);
bool is_blank(std::string_view s);

// Unicode canonical composition (NFC).
std::string nfc(std::string_view s);

// ASCII lowercase; non-ASCII bytes pass through untouched so the result is
// stable across platforms and library versions.
std::string ascii_lower(std::string_view s);

// Whitespace tokenization of the ASCII-lowercased text.
std::vector<std::string> tokenize_lower(std::string_view s);

// Token-level F1: 2 * |multiset intersection| / (|a| + |b|) over lowercased
// whitespace tokens. Two token-less strings compare as 1.
double token_f1(std::string_view a, std::string_view b);

}  // namespace forge::text
