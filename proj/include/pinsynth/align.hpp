// Forced-alignment ingestion: parse per-character time segments produced
// by an external aligner and slice source audio into fragments.
//
// The alignment file is line-oriented, one segment per line:
//
//   <utt_id> <start_sec> <dur_sec> <char>
//
// whitespace-separated, `#` comments allowed. Converting from standard
// 5-column CTM (utt channel start dur token) is `awk '{print $1,$3,$4,$5}'`.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pinsynth/audio.hpp"

namespace pinsynth {

/// One aligned character span inside an utterance.
struct AlignmentSegment {
  std::string utt_id;
  char32_t ch = 0;
  double start_sec = 0.0;
  double dur_sec = 0.0;

  auto operator<=>(const AlignmentSegment&) const = default;
};

/// Parses an alignment file. Validates per row (numeric times, dur > 0,
/// start >= 0, single-character token) and per utterance (segments must
/// not overlap when sorted by start; an overlap error names the utterance
/// and both offending lines). Rows keep file order.
std::vector<AlignmentSegment> parse_alignment(const std::filesystem::path& path);

/// Writes segments in the same format, times with 9 decimal places so a
/// parse of the output reproduces the input exactly.
void write_alignment(const std::vector<AlignmentSegment>& segments,
                     const std::filesystem::path& path);

/// Sample span [round(start*rate), round((start+dur)*rate)) of `clip`,
/// rounding half away from zero. Throws "out of range" naming the
/// utterance when the segment extends past the end of the audio.
AudioClip slice_fragment(const AudioClip& clip, const AlignmentSegment& seg);

/// Directory of utterance audio, resolved as `<root>/<utt_id>.wav`.
struct UtteranceAudioStore {
  std::filesystem::path root;

  std::filesystem::path wav_path(const std::string& utt_id) const {
    return root / (utt_id + ".wav");
  }
};

}  // namespace pinsynth
