// RIFF/WAVE reader and writer for the one layout the pipeline speaks:
// PCM, 16-bit signed, little-endian, mono. Anything else is rejected with
// an error naming the offending header field, never coerced.

#pragma once

#include <filesystem>

#include "pinsynth/audio.hpp"

namespace pinsynth {

/// Reads a PCM16 mono WAV file. Samples come back as raw_int / 32768
/// (exact), so the result lies in [-1, 1 - 1/32768].
AudioClip read_wav(const std::filesystem::path& path);

/// Header-only facts about a WAV file.
struct WavInfo {
  int sample_rate_hz = 0;
  std::int64_t n_samples = 0;
};

/// Parses headers and chunk sizes without decoding samples. Applies the
/// same format checks as read_wav.
WavInfo probe_wav(const std::filesystem::path& path);

/// Writes a clip as PCM16 mono little-endian. Samples are clamped to
/// [-1, 1 - 1/32768], then rounded half away from zero. Rereading the file
/// recovers each sample to within 1/32768.
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

/// write_wav's quantizer, exposed so tests and byte-level comparisons can
/// pin the exact rule: clamp then round half away from zero.
std::int16_t quantize_sample(double sample);

}  // namespace pinsynth
