#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ctpt::utf8 {

// Decodes one codepoint starting at s[i]. Returns false on malformed
// input (overlong forms, surrogates, bad continuation bytes).
inline bool decode_one(std::string_view s, size_t& i, uint32_t& cp) {
  unsigned char c = s[i];
  size_t n;
  uint32_t v;
  if (c < 0x80) {
    cp = c;
    ++i;
    return true;
  } else if ((c & 0xE0) == 0xC0) {
    n = 1;
    v = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    n = 2;
    v = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    n = 3;
    v = c & 0x07;
  } else {
    return false;
  }
  if (i + n >= s.size()) return false;
  for (size_t k = 1; k <= n; ++k) {
    unsigned char cc = s[i + k];
    if ((cc & 0xC0) != 0x80) return false;
    v = (v << 6) | (cc & 0x3F);
  }
  // Reject overlong encodings and surrogate range.
  static constexpr uint32_t kMin[4] = {0, 0x80, 0x800, 0x10000};
  if (v < kMin[n] || v > 0x10FFFF || (v >= 0xD800 && v <= 0xDFFF)) return false;
  cp = v;
  i += n + 1;
  return true;
}

inline bool decode(std::string_view s, std::vector<uint32_t>& out) {
  out.clear();
  size_t i = 0;
  while (i < s.size()) {
    uint32_t cp;
    if (!decode_one(s, i, cp)) return false;
    out.push_back(cp);
  }
  return true;
}

inline void append(std::string& out, uint32_t cp) {
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

inline std::string encode(const std::vector<uint32_t>& cps) {
  std::string out;
  for (uint32_t cp : cps) append(out, cp);
  return out;
}

inline bool valid(std::string_view s) {
  size_t i = 0;
  uint32_t cp;
  while (i < s.size()) {
    if (!decode_one(s, i, cp)) return false;
  }
  return true;
}

// Number of unicode scalar values; -1 if malformed.
inline long scalar_count(std::string_view s) {
  size_t i = 0;
  long n = 0;
  uint32_t cp;
  while (i < s.size()) {
    if (!decode_one(s, i, cp)) return -1;
    ++n;
  }
  return n;
}

}  // namespace ctpt::utf8
