#include "forge/text.hpp"

#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace forge::text {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

bool is_space_cp(char32_t cp) {
  switch (cp) {
    case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
    case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    unsigned char c = byte(i);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xE0) == 0xC0 && i + 1 < s.size() && (byte(i + 1) & 0xC0) == 0x80) {
      cp = ((c & 0x1Fu) << 6) | (byte(i + 1) & 0x3Fu);
      len = 2;
      if (cp < 0x80) cp = 0xFFFD;  // overlong
    } else if ((c & 0xF0) == 0xE0 && i + 2 < s.size() && (byte(i + 1) & 0xC0) == 0x80 &&
               (byte(i + 2) & 0xC0) == 0x80) {
      cp = ((c & 0x0Fu) << 12) | ((byte(i + 1) & 0x3Fu) << 6) | (byte(i + 2) & 0x3Fu);
      len = 3;
      if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    } else if ((c & 0xF8) == 0xF0 && i + 3 < s.size() && (byte(i + 1) & 0xC0) == 0x80 &&
               (byte(i + 2) & 0xC0) == 0x80 && (byte(i + 3) & 0xC0) == 0x80) {
      cp = ((c & 0x07u) << 18) | ((byte(i + 1) & 0x3Fu) << 12) |
           ((byte(i + 2) & 0x3Fu) << 6) | (byte(i + 3) & 0x3Fu);
      len = 4;
      if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size() * 3);
  for (char32_t cp : cps) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

namespace {
bool trimmable(char32_t cp) { return is_space_cp(cp) || cp == 0xFEFF; }
}  // namespace

std::string trim(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && trimmable(cps[b])) ++b;
  while (e > b && trimmable(cps[e - 1])) --e;
  return encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

std::string trim_right(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  std::size_t e = cps.size();
  while (e > 0 && trimmable(cps[e - 1])) --e;
  return encode_utf8(std::u32string_view(cps).substr(0, e));
}

bool is_blank(std::string_view s) {
  for (char32_t cp : decode_utf8(s)) {
    if (!trimmable(cp)) return false;
  }
  return true;
}

std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC unavailable");

  // UTF-8 -> UTF-16
  std::u16string u16(s.size() + 1, u'\0');
  int32_t u16len = 0;
  status = U_ZERO_ERROR;
  u_strFromUTF8(u16.data(), static_cast<int32_t>(u16.size()), &u16len, s.data(),
                static_cast<int32_t>(s.size()), &status);
  if (U_FAILURE(status)) {
    // Re-encode leniently (replaces bad sequences with U+FFFD) and retry once.
    std::string repaired = encode_utf8(decode_utf8(s));
    status = U_ZERO_ERROR;
    u16.assign(repaired.size() + 1, u'\0');
    u_strFromUTF8(u16.data(), static_cast<int32_t>(u16.size()), &u16len,
                  repaired.data(), static_cast<int32_t>(repaired.size()), &status);
    if (U_FAILURE(status)) throw std::runtime_error("UTF-8 to UTF-16 conversion failed");
  }

  std::u16string out16(static_cast<std::size_t>(u16len) * 3 + 16, u'\0');
  status = U_ZERO_ERROR;
  int32_t outlen = unorm2_normalize(norm, u16.data(), u16len, out16.data(),
                                    static_cast<int32_t>(out16.size()), &status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");

  std::string out(static_cast<std::size_t>(outlen) * 3 + 16, '\0');
  int32_t out8len = 0;
  status = U_ZERO_ERROR;
  u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &out8len, out16.data(),
              outlen, &status);
  if (U_FAILURE(status)) throw std::runtime_error("UTF-16 to UTF-8 conversion failed");
  out.resize(static_cast<std::size_t>(out8len));
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> tokenize_lower(std::string_view s) {
  std::u32string cps = decode_utf8(ascii_lower(s));
  std::vector<std::string> tokens;
  std::u32string cur;
  for (char32_t cp : cps) {
    if (trimmable(cp)) {
      if (!cur.empty()) {
        tokens.push_back(encode_utf8(cur));
        cur.clear();
      }
    } else {
      cur.push_back(cp);
    }
  }
  if (!cur.empty()) tokens.push_back(encode_utf8(cur));
  return tokens;
}

double token_f1(std::string_view a, std::string_view b) {
  std::vector<std::string> ta = tokenize_lower(a);
  std::vector<std::string> tb = tokenize_lower(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;

  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : ta) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : tb) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return 2.0 * static_cast<double>(overlap) /
         static_cast<double>(ta.size() + tb.size());
}

}  // namespace forge::text
