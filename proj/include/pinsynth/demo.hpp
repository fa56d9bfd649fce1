// Bundled synthetic mini-corpus: ten labeled utterances, a reading table,
// alignment, and a hundred-line text file. Everything a tutorial, test or
// benchmark needs to run the full pipeline without real recordings.
//
// Generation uses only integer phase accumulation, linear windows and the
// fixed RNG, never libm, so corpus bytes are identical on every platform.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pinsynth/align.hpp"
#include "pinsynth/audio.hpp"
#include "pinsynth/pinyin.hpp"

namespace pinsynth {

inline constexpr int kDemoSampleRateHz = 16000;

/// Reading table shipped with the toolkit: common characters, polyphones
/// listed most-common-first. Loaded once, shared.
const CharPinyinTable& bundled_table();

struct DemoCorpus {
  std::vector<AlignmentSegment> segments;                  // 40, ten utterances
  std::map<std::string, AudioClip> audio;                  // utt_id -> waveform
  std::vector<std::pair<std::string, std::string>> texts;  // 100 synthesis lines
};

/// The corpus, deterministically. Character spans are distinct windowed
/// tones with seeded noise, separated by real silence, and the alignment
/// marks the exact span boundaries. Samples sit on the PCM16 grid, so the
/// written files decode back to exactly these values.
DemoCorpus make_demo_corpus();

/// Writes the corpus as the files the CLI consumes:
///   <dir>/wav/<utt_id>.wav
///   <dir>/align.txt
///   <dir>/texts.tsv
///   <dir>/pinyin_table.tsv   (the bundled table)
void write_demo_corpus(const DemoCorpus& corpus, const std::filesystem::path& dir);

}  // namespace pinsynth
