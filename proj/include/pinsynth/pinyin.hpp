// Character-to-Pinyin resolution: tone-numbered syllable keys, the
// character reading table, and conversion of Mandarin text into the key
// sequence that drives fragment lookup.
//
// Keys are tone-numbered ASCII ("jia1", tone 5 = neutral, "v" stands for
// u-umlaut). Different tones are different keys. Polyphones resolve to
// their first listed reading, which the table stores most-common-first.

#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pinsynth {

/// One pronunciation: lowercase ASCII syllable plus tone 1-5.
struct PinyinSyllable {
  std::string base;
  int tone = 0;

  /// Tone-numbered form, e.g. "jia1". The canonical key string.
  std::string str() const { return base + static_cast<char>('0' + tone); }

  /// Parses strict numbered form ([a-z]+[1-5]). Throws on anything else.
  static PinyinSyllable parse(std::string_view token);

  auto operator<=>(const PinyinSyllable&) const = default;
};

/// Parses a syllable token as it may appear in a table file: either
/// numbered form ("zhong1") or tone-marked form ("zhōng", normalized to
/// numbered). Bare ASCII without a tone digit is rejected; neutral tone
/// must be written with an explicit 5.
PinyinSyllable parse_syllable_token(std::string_view token);

/// Character -> ordered readings, first entry most common. Immutable
/// after load; lookups are read-only and freely shareable.
class CharPinyinTable {
 public:
  CharPinyinTable() = default;

  /// Loads a UTF-8 TSV file: `<char>\t<syllable,list>`, `#` comments
  /// allowed, BOM rejected. Throws with the offending line number on
  /// duplicate characters, malformed syllables or non-CJK keys.
  static CharPinyinTable load(const std::filesystem::path& path);

  /// Builds a table from in-memory rows, applying the same validation.
  static CharPinyinTable from_rows(
      const std::vector<std::pair<char32_t, std::vector<PinyinSyllable>>>& rows);

  /// Writes the table in canonical form: codepoint order, numbered tones,
  /// no comments. save followed by load reproduces the table exactly, and
  /// equal tables produce byte-identical files.
  void save(const std::filesystem::path& path) const;

  /// Readings for `ch`, or nullptr when unmapped.
  const std::vector<PinyinSyllable>* find(char32_t ch) const;

  /// First (most common) reading. Throws "unmapped character" with the
  /// character and its codepoint when absent.
  PinyinSyllable primary_reading(char32_t ch) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<char32_t, std::vector<PinyinSyllable>>& entries() const {
    return entries_;
  }

 private:
  std::map<char32_t, std::vector<PinyinSyllable>> entries_;
};

enum class OnUnmapped { kError, kSkip, kSubstituteSilence };

/// How text_to_keys treats characters it cannot label.
struct TextPolicy {
  OnUnmapped on_unmapped = OnUnmapped::kError;
  bool strip_non_cjk = true;
};

/// Labeled key sequence for one text. Labeled items carry exactly one
/// key per transcript character, so the transcript can never desynchronize
/// from the audio built from it. Silence items (from
/// OnUnmapped::kSubstituteSilence) occupy a position in the audio but not
/// in the transcript.
struct TextKeys {
  struct Item {
    enum class Kind { kLabeled, kSilence };
    Kind kind = Kind::kLabeled;
    char32_t ch = 0;
    PinyinSyllable key;  // meaningful only when kind == kLabeled
  };

  std::vector<Item> items;

  std::size_t labeled_count() const;
  std::vector<PinyinSyllable> keys() const;
  /// UTF-8 string of the labeled characters, in order.
  std::string transcript() const;
};

/// Per-character primary readings for `text`, in order. Non-CJK
/// characters are dropped under policy.strip_non_cjk, otherwise routed
/// through policy.on_unmapped like unmapped CJK characters. Error mode
/// aborts listing all unmapped characters at once.
TextKeys text_to_keys(const CharPinyinTable& table, std::string_view text,
                      const TextPolicy& policy);

}  // namespace pinsynth
