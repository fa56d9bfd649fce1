// Energy normalization and splicing. Fixed-case numbers were computed
// with an independent implementation and are compared exactly: the
// sequential summation order is part of the reproducibility contract.

#include <cmath>
#include <vector>

#include <doctest.h>

#include "pinsynth/audio.hpp"
#include "pinsynth/error.hpp"
#include "pinsynth/rng.hpp"
#include "testutil.hpp"

using namespace pinsynth;
using testutil::make_clip;

TEST_CASE("l2_norm reference values") {
  CHECK_EQ(l2_norm(make_clip(8000, {0.5})), 0.5);
  CHECK_EQ(l2_norm(make_clip(8000, {0.25, -0.25})), 0.3535533905932738);
  CHECK_EQ(l2_norm(make_clip(8000, {0.1, 0.2, 0.3})), 0.37416573867739417);
  CHECK_EQ(l2_norm(make_clip(8000, {})), 0.0);
}

TEST_CASE("normalize_energy reference case") {
  const std::vector<AudioClip> clips = {
      make_clip(8000, {0.5}),
      make_clip(8000, {0.25, -0.25}),
      make_clip(8000, {0.1, 0.2, 0.3}),
  };
  const NormalizationResult result = normalize_energy(clips);

  CHECK_EQ(result.target_energy, 0.40923970975688934);
  REQUIRE_EQ(result.clips.size(), 3);
  CHECK_EQ(result.clips[0].samples[0], 0.40923970975688934);
  CHECK_EQ(result.clips[1].samples[0], 0.28937617389991094);
  CHECK_EQ(result.clips[1].samples[1], -0.28937617389991094);
  CHECK_EQ(result.clips[2].samples[0], 0.10937391306950635);
  CHECK_EQ(result.clips[2].samples[1], 0.2187478261390127);
  CHECK_EQ(result.clips[2].samples[2], 0.328121739208519);

  // Inputs untouched, shapes preserved.
  CHECK_EQ(clips[2].samples[1], 0.2);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    CHECK_EQ(result.clips[i].samples.size(), clips[i].samples.size());
    CHECK_EQ(result.clips[i].sample_rate_hz, clips[i].sample_rate_hz);
  }
}

TEST_CASE("normalize_energy properties over random sequences") {
  Xoshiro256StarStar rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AudioClip> clips;
    const std::size_t n = 1 + rng.uniform_index(8);
    for (std::size_t i = 0; i < n; ++i) {
      AudioClip clip;
      clip.sample_rate_hz = 16000;
      const std::size_t len = 1 + rng.uniform_index(64);
      for (std::size_t j = 0; j < len; ++j) {
        clip.samples.push_back((rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0);
      }
      if (l2_norm(clip) == 0.0) clip.samples[0] = 0.5;
      clips.push_back(std::move(clip));
    }

    const NormalizationResult once = normalize_energy(clips);

    // Mean norm is the common target.
    double mean = 0.0;
    for (const auto& c : clips) mean += l2_norm(c);
    mean /= static_cast<double>(n);
    CHECK_LE(std::abs(once.target_energy - mean), 1e-12 * mean);

    // Every scaled clip sits on the target within 1e-6 relative.
    for (const auto& c : once.clips) {
      CHECK_LE(std::abs(l2_norm(c) - once.target_energy), 1e-6 * once.target_energy);
    }

    // Normalizing again moves nothing by more than 1e-9 per sample.
    const NormalizationResult twice = normalize_energy(once.clips);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < once.clips[i].samples.size(); ++j) {
        CHECK_LE(std::abs(twice.clips[i].samples[j] - once.clips[i].samples[j]), 1e-9);
      }
    }
  }
}

TEST_CASE("normalize_energy rejection paths") {
  CHECK(testutil::error_of([] { normalize_energy({}); }).find("empty sequence") !=
        std::string::npos);

  const std::vector<AudioClip> mixed = {make_clip(8000, {0.5}), make_clip(16000, {0.5})};
  CHECK(testutil::error_of([&] { normalize_energy(mixed); }).find("rate mismatch") !=
        std::string::npos);

  const std::vector<AudioClip> silent = {make_clip(8000, {0.5}), make_clip(8000, {0.0, 0.0})};
  CHECK(testutil::error_of([&] { normalize_energy(silent); }).find("silent fragment") !=
        std::string::npos);

  const std::vector<AudioClip> nan = {make_clip(8000, {std::nan("")})};
  CHECK(testutil::error_of([&] { normalize_energy(nan); }).find("non-finite") !=
        std::string::npos);
}

TEST_CASE("gap_sample_count rounds half away from zero") {
  CHECK_EQ(gap_sample_count(12.5, 8000), 100);
  CHECK_EQ(gap_sample_count(0.0, 16000), 0);
  CHECK_EQ(gap_sample_count(10.0, 16000), 160);
  CHECK_EQ(gap_sample_count(0.03125, 16000), 1);  // 0.5 samples
}

TEST_CASE("concatenate layout: clips in order, gaps only between") {
  const std::vector<AudioClip> clips = {
      make_clip(8000, {0.1, 0.2}),
      make_clip(8000, {0.3, 0.4, 0.5}),
  };

  const AudioClip joined = concatenate(clips, 12.5);
  REQUIRE_EQ(joined.samples.size(), 2 + 100 + 3);
  CHECK_EQ(joined.sample_rate_hz, 8000);
  CHECK_EQ(joined.samples[0], 0.1);
  CHECK_EQ(joined.samples[1], 0.2);
  for (int i = 2; i < 102; ++i) CHECK_EQ(joined.samples[i], 0.0);
  CHECK_EQ(joined.samples[102], 0.3);
  CHECK_EQ(joined.samples[104], 0.5);

  const AudioClip tight = concatenate(clips, 0.0);
  CHECK_EQ(tight.samples.size(), 5);

  const std::vector<AudioClip> one = {make_clip(8000, {0.9})};
  CHECK_EQ(concatenate(one, 1000.0).samples.size(), 1);
}

TEST_CASE("concatenate rejection paths") {
  const std::vector<AudioClip> clips = {make_clip(8000, {0.1})};
  CHECK(testutil::error_of([&] { concatenate(clips, -1.0); }).find("negative gap") !=
        std::string::npos);
  CHECK_FALSE(testutil::error_of([] { concatenate({}, 0.0); }).empty());

  const std::vector<AudioClip> mixed = {make_clip(8000, {0.5}), make_clip(16000, {0.5})};
  CHECK_FALSE(testutil::error_of([&] { concatenate(mixed, 0.0); }).empty());
}
