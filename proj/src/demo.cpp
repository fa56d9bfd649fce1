#include "pinsynth/demo.hpp"

#include <cstdio>
#include <string_view>

#include "pinsynth/error.hpp"
#include "pinsynth/fsio.hpp"
#include "pinsynth/rng.hpp"
#include "pinsynth/utf8.hpp"
#include "pinsynth/wav.hpp"

namespace pinsynth {

namespace {

constexpr std::uint64_t kDemoSeed = 0x70C0'5EED'2026'0001uLL;

// Readings are comma lists in tone-numbered form, most common first.
struct TableRow {
  char32_t ch;
  const char* readings;
};

constexpr TableRow kBundledRows[] = {
    {U'一', "yi1"},          {U'七', "qi1"},     {U'万', "wan4"},
    {U'三', "san1"},         {U'上', "shang4"},  {U'下', "xia4"},
    {U'中', "zhong1,zhong4"}, {U'九', "jiu3"},   {U'二', "er4"},
    {U'五', "wu3"},          {U'人', "ren2"},    {U'他', "ta1"},
    {U'八', "ba1"},          {U'六', "liu4"},    {U'十', "shi2"},
    {U'千', "qian1"},        {U'口', "kou3"},    {U'古', "gu3"},
    {U'可', "ke3"},          {U'四', "si4"},     {U'国', "guo2"},
    {U'土', "tu3"},          {U'地', "di4,de5"}, {U'大', "da4,dai4"},
    {U'天', "tian1"},        {U'她', "ta1"},     {U'好', "hao3,hao4"},
    {U'妈', "ma1"},          {U'字', "zi4"},     {U'学', "xue2"},
    {U'家', "jia1"},         {U'小', "xiao3"},   {U'山', "shan1"},
    {U'市', "shi4"},         {U'年', "nian2"},   {U'心', "xin1"},
    {U'手', "shou3"},        {U'文', "wen2"},    {U'数', "shu4,shu3"},
    {U'日', "ri4"},          {U'时', "shi2"},    {U'明', "ming2"},
    {U'月', "yue4"},         {U'木', "mu4"},     {U'乐', "le4,yue4"},
    {U'水', "shui3"},        {U'火', "huo3"},    {U'白', "bai2"},
    {U'百', "bai3"},         {U'的', "de5,di2,di4"}, {U'石', "shi2"},
    {U'说', "shuo1,shui4"},  {U'语', "yu3"},     {U'话', "hua4"},
    {U'长', "chang2,zhang3"}, {U'门', "men2"},   {U'问', "wen4"},
    {U'颊', "jia2"},         {U'马', "ma3"},     {U'吗', "ma5"},
    {U'高', "gao1"},         {U'鱼', "yu2"},     {U'鸟', "niao3"},
    {U'了', "le5,liao3"},    {U'事', "shi4"},    {U'亮', "liang4"},
    {U'以', "yi3"},          {U'们', "men5"},    {U'加', "jia1"},
    {U'动', "dong4"},        {U'北', "bei3"},    {U'南', "nan2"},
    {U'女', "nv3"},          {U'东', "dong1"},   {U'是', "shi4"},
    {U'生', "sheng1"},       {U'绿', "lv4"},     {U'行', "xing2,hang2"},
    {U'西', "xi1"},          {U'式', "shi4"},    {U'它', "ta1"},
};

std::vector<PinyinSyllable> parse_reading_list(const char* list) {
  std::vector<PinyinSyllable> readings;
  std::string_view rest(list);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    readings.push_back(parse_syllable_token(rest.substr(0, comma)));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  return readings;
}

// The ten labeled utterances; every character is in the bundled table.
struct DemoUtterance {
  const char* utt_id;
  const char32_t* chars;  // 4 characters
};

constexpr char32_t kU01[] = {U'他', U'家', U'中', U'文'};
constexpr char32_t kU02[] = {U'她', U'加', U'好', U'人'};
constexpr char32_t kU03[] = {U'大', U'是', U'中', U'家'};
constexpr char32_t kU04[] = {U'颊', U'好', U'他', U'市'};
constexpr char32_t kU05[] = {U'人', U'中', U'文', U'大'};
constexpr char32_t kU06[] = {U'市', U'颊', U'她', U'好'};
constexpr char32_t kU07[] = {U'文', U'人', U'加', U'大'};
constexpr char32_t kU08[] = {U'中', U'他', U'是', U'家'};
constexpr char32_t kU09[] = {U'好', U'大', U'人', U'颊'};
constexpr char32_t kU10[] = {U'她', U'文', U'市', U'加'};

constexpr DemoUtterance kUtterances[] = {
    {"u01", kU01}, {"u02", kU02}, {"u03", kU03}, {"u04", kU04}, {"u05", kU05},
    {"u06", kU06}, {"u07", kU07}, {"u08", kU08}, {"u09", kU09}, {"u10", kU10},
};

constexpr char32_t kTextPool[] = {U'他', U'她', U'家', U'加', U'颊', U'中',
                                  U'文', U'好', U'人', U'大', U'是', U'市'};

constexpr std::int64_t kHeadSilence = 800;   // 0.05 s
constexpr std::int64_t kInterSilence = 480;  // 0.03 s
constexpr std::int64_t kTailSilence = 640;   // 0.04 s

// Distinct fundamental per character so fragments are audibly different.
int char_tone_hz(char32_t ch) {
  int idx = 0;
  for (const char32_t pool : kTextPool) {
    if (pool == ch) return 180 + 40 * idx;
    ++idx;
  }
  return 180;
}

double uniform01(Xoshiro256StarStar& rng) {
  return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

// Triangle tone under a trapezoid window, plus a little noise. Pure
// integer-phase and linear arithmetic: no libm, identical on every host.
void append_char_span(std::vector<double>& samples, std::int64_t n, int tone_hz,
                      Xoshiro256StarStar& rng) {
  std::int64_t phase = 0;
  const std::int64_t ramp = n / 8;
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(phase) / kDemoSampleRateHz;
    const double tri = x < 0.5 ? 4.0 * x - 1.0 : 3.0 - 4.0 * x;
    double window = 1.0;
    if (i < ramp) {
      window = static_cast<double>(i) / static_cast<double>(ramp);
    } else if (i >= n - ramp) {
      window = static_cast<double>(n - 1 - i) / static_cast<double>(ramp);
    }
    const double noise = (uniform01(rng) * 2.0 - 1.0) * 0.015;
    samples.push_back(0.35 * window * tri + noise);
    phase += tone_hz;
    if (phase >= kDemoSampleRateHz) phase -= kDemoSampleRateHz;
  }
}

}  // namespace

const CharPinyinTable& bundled_table() {
  static const CharPinyinTable table = [] {
    std::vector<std::pair<char32_t, std::vector<PinyinSyllable>>> rows;
    rows.reserve(std::size(kBundledRows));
    for (const TableRow& row : kBundledRows) {
      rows.emplace_back(row.ch, parse_reading_list(row.readings));
    }
    return CharPinyinTable::from_rows(rows);
  }();
  return table;
}

DemoCorpus make_demo_corpus() {
  DemoCorpus corpus;

  for (const DemoUtterance& utt : kUtterances) {
    Xoshiro256StarStar rng(derive_stream_seed(kDemoSeed, utt.utt_id, 0));
    AudioClip clip;
    clip.sample_rate_hz = kDemoSampleRateHz;
    clip.samples.assign(kHeadSilence, 0.0);

    for (int c = 0; c < 4; ++c) {
      if (c > 0) {
        clip.samples.insert(clip.samples.end(), kInterSilence, 0.0);
      }
      // 0.12 s to 0.25 s per character.
      const std::int64_t span =
          1920 + static_cast<std::int64_t>(rng.uniform_index(2081));
      const std::int64_t start = static_cast<std::int64_t>(clip.samples.size());
      append_char_span(clip.samples, span, char_tone_hz(utt.chars[c]), rng);

      AlignmentSegment seg;
      seg.utt_id = utt.utt_id;
      seg.ch = utt.chars[c];
      seg.start_sec = static_cast<double>(start) / kDemoSampleRateHz;
      seg.dur_sec = static_cast<double>(span) / kDemoSampleRateHz;
      corpus.segments.push_back(std::move(seg));
    }

    clip.samples.insert(clip.samples.end(), kTailSilence, 0.0);
    // Snap to the PCM16 grid: the in-memory corpus equals what the
    // written files decode back to.
    for (double& s : clip.samples) s = quantize_sample(s) / 32768.0;
    corpus.audio.emplace(utt.utt_id, std::move(clip));
  }

  Xoshiro256StarStar text_rng(derive_stream_seed(kDemoSeed, "texts", 0));
  for (int i = 1; i <= 100; ++i) {
    char utt_id[8];
    std::snprintf(utt_id, sizeof utt_id, "t%03d", i);
    const std::uint64_t len = 3 + text_rng.uniform_index(6);  // 3..8 characters
    std::string text;
    for (std::uint64_t c = 0; c < len; ++c) {
      text += utf8::encode(kTextPool[text_rng.uniform_index(std::size(kTextPool))]);
    }
    corpus.texts.emplace_back(utt_id, std::move(text));
  }
  return corpus;
}

void write_demo_corpus(const DemoCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "wav");
  for (const auto& [utt_id, clip] : corpus.audio) {
    write_wav(clip, dir / "wav" / (utt_id + ".wav"));
  }
  write_alignment(corpus.segments, dir / "align.txt");

  std::string texts;
  for (const auto& [utt_id, text] : corpus.texts) {
    texts += utt_id;
    texts += '\t';
    texts += text;
    texts += '\n';
  }
  write_text_file(dir / "texts.tsv", texts);
  bundled_table().save(dir / "pinyin_table.tsv");
}

}  // namespace pinsynth
