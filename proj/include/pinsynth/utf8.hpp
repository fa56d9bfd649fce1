// Minimal UTF-8 codec plus the CJK-ideograph predicate used for
// transcript handling. Only what the pipeline needs; no locale machinery.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pinsynth::utf8 {

/// Decodes the codepoint starting at byte offset `pos`, advancing `pos`
/// past it. Throws Error on truncated or malformed sequences.
char32_t decode_next(std::string_view text, std::size_t& pos);

/// UTF-8 encoding of a single codepoint.
std::string encode(char32_t cp);

/// All codepoints of `text`, in order. Throws on malformed input.
std::vector<char32_t> decode(std::string_view text);

/// Codepoint count of a valid UTF-8 string.
std::size_t length(std::string_view text);

/// True when `text` is exactly one well-formed codepoint.
bool is_single_codepoint(std::string_view text);

/// CJK Unified Ideographs: the URO, Extension A and the supplementary
/// ideographic planes.
bool is_cjk_ideograph(char32_t cp);

/// Human-readable form for error messages: the character plus its
/// codepoint, e.g. `好 (U+597D)`.
std::string describe(char32_t cp);

}  // namespace pinsynth::utf8
