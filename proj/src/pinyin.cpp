#include "pinsynth/pinyin.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pinsynth/error.hpp"
#include "pinsynth/utf8.hpp"

namespace pinsynth {

namespace {

struct MarkedVowel {
  char32_t cp;
  char plain;
  int tone;
};

// Pinyin tone-marked vowels, lowercase. u-umlaut maps to 'v'.
constexpr MarkedVowel kMarkedVowels[] = {
    {0x0101, 'a', 1}, {0x00E1, 'a', 2}, {0x01CE, 'a', 3}, {0x00E0, 'a', 4},
    {0x0113, 'e', 1}, {0x00E9, 'e', 2}, {0x011B, 'e', 3}, {0x00E8, 'e', 4},
    {0x012B, 'i', 1}, {0x00ED, 'i', 2}, {0x01D0, 'i', 3}, {0x00EC, 'i', 4},
    {0x014D, 'o', 1}, {0x00F3, 'o', 2}, {0x01D2, 'o', 3}, {0x00F2, 'o', 4},
    {0x016B, 'u', 1}, {0x00FA, 'u', 2}, {0x01D4, 'u', 3}, {0x00F9, 'u', 4},
    {0x01D6, 'v', 1}, {0x01D8, 'v', 2}, {0x01DA, 'v', 3}, {0x01DC, 'v', 4},
};

const MarkedVowel* find_marked(char32_t cp) {
  for (const auto& m : kMarkedVowels) {
    if (m.cp == cp) return &m;
  }
  return nullptr;
}

[[noreturn]] void bad_token(std::string_view token, const std::string& why) {
  throw Error("malformed syllable token \"" + std::string(token) + "\": " + why);
}

}  // namespace

PinyinSyllable PinyinSyllable::parse(std::string_view token) {
  if (token.size() < 2) bad_token(token, "expected [a-z]+[1-5]");
  const char last = token.back();
  if (last < '1' || last > '5') bad_token(token, "expected tone digit 1-5 at end");
  for (const char c : token.substr(0, token.size() - 1)) {
    if (c < 'a' || c > 'z') bad_token(token, "expected lowercase ASCII letters");
  }
  return PinyinSyllable{std::string(token.substr(0, token.size() - 1)), last - '0'};
}

PinyinSyllable parse_syllable_token(std::string_view token) {
  if (token.empty()) bad_token(token, "empty");

  std::string base;
  int tone = 0;
  bool saw_mark = false;
  std::size_t pos = 0;
  while (pos < token.size()) {
    char32_t cp;
    try {
      cp = utf8::decode_next(token, pos);
    } catch (const Error&) {
      bad_token(token, "invalid UTF-8");
    }
    if (cp >= 'a' && cp <= 'z') {
      base.push_back(static_cast<char>(cp));
    } else if (cp >= '1' && cp <= '5') {
      if (pos != token.size()) bad_token(token, "tone digit must be last");
      if (saw_mark) bad_token(token, "both tone mark and tone digit");
      tone = static_cast<int>(cp - '0');
    } else if (cp == 0x00FC) {  // plain u-umlaut
      base.push_back('v');
    } else if (const MarkedVowel* m = find_marked(cp)) {
      if (saw_mark) bad_token(token, "more than one tone mark");
      base.push_back(m->plain);
      tone = m->tone;
      saw_mark = true;
    } else {
      bad_token(token, "unexpected character " + utf8::describe(cp));
    }
  }
  if (base.empty()) bad_token(token, "no letters");
  if (tone == 0) bad_token(token, "no tone (write neutral tone as an explicit 5)");
  return PinyinSyllable{std::move(base), tone};
}

CharPinyinTable CharPinyinTable::from_rows(
    const std::vector<std::pair<char32_t, std::vector<PinyinSyllable>>>& rows) {
  CharPinyinTable table;
  for (const auto& [ch, readings] : rows) {
    if (!utf8::is_cjk_ideograph(ch)) {
      throw Error("table key " + utf8::describe(ch) + " is not a CJK ideograph");
    }
    if (readings.empty()) {
      throw Error("table key " + utf8::describe(ch) + " has no readings");
    }
    if (!table.entries_.emplace(ch, readings).second) {
      throw Error("duplicate table key " + utf8::describe(ch));
    }
  }
  return table;
}

CharPinyinTable CharPinyinTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open pinyin table " + path.string());

  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    throw Error("pinyin table " + path.string() + " starts with a BOM; strip it");
  }

  CharPinyinTable table;
  std::istringstream lines(content);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    const auto context = path.string() + ":" + std::to_string(line_no);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(context + ": expected exactly one tab separating character and readings");
    }
    const std::string char_field = line.substr(0, tab);
    const std::string list_field = line.substr(tab + 1);

    if (!utf8::is_single_codepoint(char_field)) {
      throw Error(context + ": character field must be a single codepoint");
    }
    std::size_t p = 0;
    const char32_t ch = utf8::decode_next(char_field, p);
    if (!utf8::is_cjk_ideograph(ch)) {
      throw Error(context + ": key " + utf8::describe(ch) + " is not a CJK ideograph");
    }

    std::vector<PinyinSyllable> readings;
    std::size_t start = 0;
    while (start <= list_field.size()) {
      std::size_t comma = list_field.find(',', start);
      if (comma == std::string::npos) comma = list_field.size();
      const std::string_view token(list_field.data() + start, comma - start);
      try {
        readings.push_back(parse_syllable_token(token));
      } catch (const Error& e) {
        throw Error(context + ": " + e.what());
      }
      start = comma + 1;
    }
    if (readings.empty()) throw Error(context + ": empty reading list");

    if (!table.entries_.emplace(ch, std::move(readings)).second) {
      throw Error(context + ": duplicate character " + utf8::describe(ch));
    }
  }
  return table;
}

void CharPinyinTable::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& [ch, readings] : entries_) {
    out += utf8::encode(ch);
    out += '\t';
    for (std::size_t i = 0; i < readings.size(); ++i) {
      if (i > 0) out += ',';
      out += readings[i].str();
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot create " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("I/O failure writing " + path.string());
}

const std::vector<PinyinSyllable>* CharPinyinTable::find(char32_t ch) const {
  const auto it = entries_.find(ch);
  return it == entries_.end() ? nullptr : &it->second;
}

PinyinSyllable CharPinyinTable::primary_reading(char32_t ch) const {
  const auto* readings = find(ch);
  if (!readings) throw Error("unmapped character " + utf8::describe(ch));
  return readings->front();
}

std::size_t TextKeys::labeled_count() const {
  std::size_t n = 0;
  for (const auto& item : items) {
    if (item.kind == Item::Kind::kLabeled) ++n;
  }
  return n;
}

std::vector<PinyinSyllable> TextKeys::keys() const {
  std::vector<PinyinSyllable> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (item.kind == Item::Kind::kLabeled) out.push_back(item.key);
  }
  return out;
}

std::string TextKeys::transcript() const {
  std::string out;
  for (const auto& item : items) {
    if (item.kind == Item::Kind::kLabeled) out += utf8::encode(item.ch);
  }
  return out;
}

TextKeys text_to_keys(const CharPinyinTable& table, std::string_view text,
                      const TextPolicy& policy) {
  TextKeys result;
  std::set<char32_t> unmapped;

  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::decode_next(text, pos);
    const bool cjk = utf8::is_cjk_ideograph(cp);
    if (!cjk && policy.strip_non_cjk) continue;

    const std::vector<PinyinSyllable>* readings = cjk ? table.find(cp) : nullptr;
    if (readings) {
      result.items.push_back({TextKeys::Item::Kind::kLabeled, cp, readings->front()});
      continue;
    }
    switch (policy.on_unmapped) {
      case OnUnmapped::kError:
        unmapped.insert(cp);
        break;
      case OnUnmapped::kSkip:
        break;
      case OnUnmapped::kSubstituteSilence:
        result.items.push_back({TextKeys::Item::Kind::kSilence, cp, {}});
        break;
    }
  }

  if (!unmapped.empty()) {
    std::string msg = "unmapped characters:";
    for (const char32_t cp : unmapped) msg += " " + utf8::describe(cp);
    throw Error(msg);
  }
  return result;
}

}  // namespace pinsynth
