#include "pinsynth/utf8.hpp"

#include <cstdio>

#include "pinsynth/error.hpp"

namespace pinsynth::utf8 {

namespace {

[[noreturn]] void malformed(std::size_t pos) {
  throw Error("malformed UTF-8 at byte offset " + std::to_string(pos));
}

}  // namespace

char32_t decode_next(std::string_view text, std::size_t& pos) {
  if (pos >= text.size()) malformed(pos);
  const auto b0 = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    pos += 1;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    malformed(pos);
  }
  if (pos + len > text.size()) malformed(pos);
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(text[pos + i]);
    if ((b & 0xC0) != 0x80) malformed(pos + i);
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong encodings and values outside Unicode.
  static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    malformed(pos);
  }
  pos += len;
  return cp;
}

std::string encode(char32_t cp) {
  std::string out;
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
  return out;
}

std::vector<char32_t> decode(std::string_view text) {
  std::vector<char32_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) out.push_back(decode_next(text, pos));
  return out;
}

std::size_t length(std::string_view text) { return decode(text).size(); }

bool is_single_codepoint(std::string_view text) {
  std::size_t pos = 0;
  try {
    decode_next(text, pos);
  } catch (const Error&) {
    return false;
  }
  return pos == text.size();
}

bool is_cjk_ideograph(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK Unified Ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // Extension A
         (cp >= 0x20000 && cp <= 0x2EBEF) ||  // Extensions B-F
         (cp >= 0x30000 && cp <= 0x323AF);    // Extensions G-H
}

std::string describe(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return encode(cp) + " (" + buf + ")";
}

}  // namespace pinsynth::utf8
