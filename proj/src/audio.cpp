#include "pinsynth/audio.hpp"

#include <cmath>
#include <string>

#include "pinsynth/error.hpp"

namespace pinsynth {

double l2_norm(const AudioClip& clip) {
  double sum_sq = 0.0;
  for (const double s : clip.samples) sum_sq += s * s;
  return std::sqrt(sum_sq);
}

NormalizationResult normalize_energy(std::span<const AudioClip> clips) {
  if (clips.empty()) throw Error("normalize_energy: empty sequence");

  const int rate = clips.front().sample_rate_hz;
  std::vector<double> norms;
  norms.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const AudioClip& clip = clips[i];
    if (clip.sample_rate_hz != rate) {
      throw Error("normalize_energy: rate mismatch, clip " + std::to_string(i) +
                  " has " + std::to_string(clip.sample_rate_hz) + " Hz, expected " +
                  std::to_string(rate) + " Hz");
    }
    const double norm = l2_norm(clip);
    if (!std::isfinite(norm)) {
      throw Error("normalize_energy: non-finite sample in clip " + std::to_string(i));
    }
    if (norm == 0.0) {
      throw Error("normalize_energy: silent fragment at index " + std::to_string(i));
    }
    norms.push_back(norm);
  }

  double sum = 0.0;
  for (const double n : norms) sum += n;
  const double target = sum / static_cast<double>(norms.size());

  NormalizationResult result;
  result.target_energy = target;
  result.clips.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const double scale = target / norms[i];
    AudioClip scaled;
    scaled.sample_rate_hz = rate;
    scaled.samples.reserve(clips[i].samples.size());
    for (const double s : clips[i].samples) scaled.samples.push_back(s * scale);
    result.clips.push_back(std::move(scaled));
  }
  return result;
}

std::int64_t gap_sample_count(double gap_ms, int sample_rate_hz) {
  if (gap_ms < 0.0) throw Error("concatenate: negative gap_ms");
  return static_cast<std::int64_t>(std::llround(gap_ms * sample_rate_hz / 1000.0));
}

AudioClip concatenate(std::span<const AudioClip> clips, double gap_ms) {
  if (clips.empty()) throw Error("concatenate: empty sequence");

  const int rate = clips.front().sample_rate_hz;
  const std::int64_t gap = gap_sample_count(gap_ms, rate);
  std::size_t total = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].sample_rate_hz != rate) {
      throw Error("concatenate: rate mismatch, clip " + std::to_string(i) + " has " +
                  std::to_string(clips[i].sample_rate_hz) + " Hz, expected " +
                  std::to_string(rate) + " Hz");
    }
    total += clips[i].samples.size();
  }
  total += static_cast<std::size_t>(gap) * (clips.size() - 1);

  AudioClip out;
  out.sample_rate_hz = rate;
  out.samples.reserve(total);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (i > 0) out.samples.insert(out.samples.end(), static_cast<std::size_t>(gap), 0.0);
    out.samples.insert(out.samples.end(), clips[i].samples.begin(), clips[i].samples.end());
  }
  return out;
}

}  // namespace pinsynth
