#pragma once

// Minimal Unicode support for the tokenizer: UTF-8 codec, whitespace and
// punctuation classification, Latin lowercasing, and canonical composition
// for the Latin combining marks that show up in western European text.
// This is deliberately not a full Unicode implementation; the covered
// ranges are listed next to each table.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "markov/errors.hpp"

namespace markov::unicode {

inline std::uint32_t decode(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t j) {
    return static_cast<unsigned char>(s[j]);
  };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len;
  std::uint32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    throw DecodeError("invalid UTF-8 lead byte at offset " + std::to_string(i));
  }
  if (i + static_cast<std::size_t>(len) > s.size()) {
    throw DecodeError("truncated UTF-8 sequence at offset " + std::to_string(i));
  }
  for (int j = 1; j < len; ++j) {
    const unsigned char b = byte(i + static_cast<std::size_t>(j));
    if ((b & 0xC0) != 0x80) {
      throw DecodeError("invalid UTF-8 continuation byte at offset " +
                        std::to_string(i + static_cast<std::size_t>(j)));
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
      (len == 4 && cp < 0x10000)) {
    throw DecodeError("overlong UTF-8 sequence at offset " + std::to_string(i));
  }
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    throw DecodeError("UTF-8 sequence encodes an invalid code point at offset " +
                      std::to_string(i));
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

// Like decode, but treats an invalid byte as a single Latin-1 code point
// instead of throwing. Used where the input is already tokenizer output.
inline std::uint32_t decode_lenient(std::string_view s, std::size_t& i) {
  const std::size_t start = i;
  try {
    return decode(s, i);
  } catch (const DecodeError&) {
    i = start + 1;
    return static_cast<unsigned char>(s[start]);
  }
}

inline void append_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline bool is_space(std::uint32_t cp) {
  switch (cp) {
    case 0x09:
    case 0x0A:
    case 0x0B:
    case 0x0C:
    case 0x0D:
    case 0x20:
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// ASCII punctuation plus the Latin-1 and General Punctuation marks common
// in Spanish and English prose (inverted marks, guillemets, curly quotes,
// dashes, ellipsis).
inline bool is_punct(std::uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1:  // inverted exclamation
    case 0xA7:  // section sign
    case 0xAB:  // left guillemet
    case 0xB6:  // pilcrow
    case 0xB7:  // middle dot
    case 0xBB:  // right guillemet
    case 0xBF:  // inverted question mark
      return true;
    default:
      return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E);
  }
}

// ASCII plus Latin-1 uppercase letters (U+00C0..U+00DE except the
// multiplication sign). Everything else passes through unchanged.
inline std::uint32_t to_lower(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

inline bool is_combining_mark(std::uint32_t cp) {
  return cp >= 0x0300 && cp <= 0x036F;
}

// Canonical composition for Latin-1 precomposed letters: base letter plus
// combining grave/acute/circumflex/tilde/diaeresis/ring/cedilla. Returns
// nullopt for pairs outside that table, which then stay decomposed.
inline std::optional<std::uint32_t> compose(std::uint32_t base,
                                            std::uint32_t mark) {
  struct Rule {
    std::uint16_t base;
    std::uint16_t mark;
    std::uint16_t composed;
  };
  static constexpr Rule kRules[] = {
      {'A', 0x0300, 0xC0}, {'A', 0x0301, 0xC1}, {'A', 0x0302, 0xC2},
      {'A', 0x0303, 0xC3}, {'A', 0x0308, 0xC4}, {'A', 0x030A, 0xC5},
      {'C', 0x0327, 0xC7}, {'E', 0x0300, 0xC8}, {'E', 0x0301, 0xC9},
      {'E', 0x0302, 0xCA}, {'E', 0x0308, 0xCB}, {'I', 0x0300, 0xCC},
      {'I', 0x0301, 0xCD}, {'I', 0x0302, 0xCE}, {'I', 0x0308, 0xCF},
      {'N', 0x0303, 0xD1}, {'O', 0x0300, 0xD2}, {'O', 0x0301, 0xD3},
      {'O', 0x0302, 0xD4}, {'O', 0x0303, 0xD5}, {'O', 0x0308, 0xD6},
      {'U', 0x0300, 0xD9}, {'U', 0x0301, 0xDA}, {'U', 0x0302, 0xDB},
      {'U', 0x0308, 0xDC}, {'Y', 0x0301, 0xDD}, {'a', 0x0300, 0xE0},
      {'a', 0x0301, 0xE1}, {'a', 0x0302, 0xE2}, {'a', 0x0303, 0xE3},
      {'a', 0x0308, 0xE4}, {'a', 0x030A, 0xE5}, {'c', 0x0327, 0xE7},
      {'e', 0x0300, 0xE8}, {'e', 0x0301, 0xE9}, {'e', 0x0302, 0xEA},
      {'e', 0x0308, 0xEB}, {'i', 0x0300, 0xEC}, {'i', 0x0301, 0xED},
      {'i', 0x0302, 0xEE}, {'i', 0x0308, 0xEF}, {'n', 0x0303, 0xF1},
      {'o', 0x0300, 0xF2}, {'o', 0x0301, 0xF3}, {'o', 0x0302, 0xF4},
      {'o', 0x0303, 0xF5}, {'o', 0x0308, 0xF6}, {'u', 0x0300, 0xF9},
      {'u', 0x0301, 0xFA}, {'u', 0x0302, 0xFB}, {'u', 0x0308, 0xFC},
      {'y', 0x0301, 0xFD}, {'y', 0x0308, 0xFF},
  };
  for (const Rule& r : kRules) {
    if (r.base == base && r.mark == mark) return r.composed;
  }
  return std::nullopt;
}

}  // namespace markov::unicode
