// Waveform data model and the numeric kernel of pseudo-speech synthesis:
// L2 energy, equal-energy normalization and splicing.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pinsynth {

/// Mono waveform. Samples are dimensionless amplitudes, nominally in
/// [-1, 1]; values outside that range are legal in memory and only get
/// clamped when written to a 16-bit file.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  std::int64_t length() const { return static_cast<std::int64_t>(samples.size()); }
  double duration_sec() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

/// Result of equal-energy normalization: the scaled clips plus the common
/// target norm they were brought to.
struct NormalizationResult {
  std::vector<AudioClip> clips;
  double target_energy = 0.0;
};

/// sqrt of the sum of squared samples; 0 for an empty clip.
double l2_norm(const AudioClip& clip);

/// Scales every clip to the mean L2 norm of the sequence: with norms
/// n_1..n_k and E = mean(n_i), clip i is multiplied by E / n_i. Ordering
/// is preserved and inputs are left untouched.
///
/// Throws: "silent fragment" if any clip has zero norm (the scale factor
/// would divide by zero), "rate mismatch" if sample rates differ,
/// "empty sequence" for no clips, "non-finite sample" on NaN/Inf input.
NormalizationResult normalize_energy(std::span<const AudioClip> clips);

/// Joins clips in order, inserting round(gap_ms * rate / 1000) zero
/// samples between consecutive clips (not before the first or after the
/// last). Throws on rate mismatch, empty input or negative gap.
AudioClip concatenate(std::span<const AudioClip> clips, double gap_ms);

/// Zero samples for `gap_ms` at `sample_rate_hz`, rounded half away from zero.
std::int64_t gap_sample_count(double gap_ms, int sample_rate_hz);

}  // namespace pinsynth
