// Pseudo-speech synthesis: map a text to fragment keys, draw one fragment
// per character from the database, equalize fragment energy, splice, and
// emit audio plus a transcript manifest.
//
// Determinism is the core contract. Every output is a pure function of
// (database, job): per-output RNG streams are derived from
// (seed, utt_id, variant), so the same job reproduces byte-identical
// trees serially, in parallel, and across machines.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pinsynth/audio.hpp"
#include "pinsynth/fragdb.hpp"
#include "pinsynth/pinyin.hpp"
#include "pinsynth/rng.hpp"

namespace pinsynth {

/// Span written for a character kept as silence
/// (OnUnmapped::kSubstituteSilence). Silence spans stay out of the
/// transcript and out of energy normalization, like inter-character gaps.
inline constexpr double kUnmappedSilenceSec = 0.2;

struct SynthesisJob {
  enum class OnMissingKey { kError, kSkipUtterance };

  std::vector<std::pair<std::string, std::string>> texts;  // (utt_id, text)
  std::uint64_t seed = 0;
  int variants = 1;
  double gap_ms = 0.0;
  OnMissingKey on_missing_key = OnMissingKey::kError;
  TextPolicy text_policy;
};

/// One synthesized output. transcript[i]'s key always matches the
/// fragment behind fragment_trace[i]; audio and label cannot drift apart.
struct PseudoUtterance {
  std::string out_id;  // "<utt_id>-v<k>" for variant k
  AudioClip clip;
  std::string transcript;
  std::vector<std::string> fragment_trace;
  /// The per-utterance mean fragment norm every fragment was scaled to.
  double target_energy = 0.0;
};

struct CoverageReport {
  struct MissingKey {
    PinyinSyllable key;
    std::int64_t occurrences = 0;
    /// Distinct characters needing this key, codepoint order, capped.
    std::vector<std::string> example_chars;
  };

  std::int64_t keys_needed = 0;  // distinct keys referenced by the texts
  std::vector<MissingKey> missing;  // sorted by key

  bool complete() const { return missing.empty(); }
  std::string json_str() const;
};

struct JobReport {
  std::int64_t requested = 0;  // texts x variants
  std::int64_t written = 0;
  std::int64_t skipped = 0;
  /// Utterance-level skip tallies (each skip discards all its variants).
  std::int64_t utterances_missing_key = 0;
  std::int64_t utterances_empty_text = 0;

  std::string json_str() const;
};

struct ManifestEntry {
  std::string out_id;
  std::string wav_path;  // relative to the output directory
  std::string transcript;

  bool operator==(const ManifestEntry&) const = default;
};

/// Decoded-fragment cache shared across outputs of one job. Thread-safe;
/// a racing double decode is benign (same bytes, first insert wins).
class FragmentAudioCache {
 public:
  std::shared_ptr<const AudioClip> get(const FragmentDb& db, const Fragment& frag);

 private:
  std::mutex mu_;
  std::unordered_map<const Fragment*, std::shared_ptr<const AudioClip>> cache_;
};

/// Which keys the texts need but the database lacks. Never throws on
/// unmapped characters regardless of policy.on_unmapped: characters
/// without a table reading need no key and are synthesis's problem.
CoverageReport check_coverage(const FragmentDb& db,
                              const std::vector<std::pair<std::string, std::string>>& texts,
                              const CharPinyinTable& table, const TextPolicy& policy);

/// One uniform draw per key, in order; repeated keys draw independently.
/// Throws naming the key when the database has no fragments for it.
std::vector<const Fragment*> select_fragments(const FragmentDb& db,
                                              std::span<const PinyinSyllable> keys,
                                              Xoshiro256StarStar& rng);

/// Full pipeline for one text. out_id is left empty; callers name the
/// output. Throws on unmapped characters (per policy), missing keys,
/// texts with no labeled characters, and silent fragments.
PseudoUtterance synthesize_one(const FragmentDb& db, std::string_view text,
                               const CharPinyinTable& table, Xoshiro256StarStar& rng,
                               double gap_ms, const TextPolicy& policy,
                               FragmentAudioCache* cache = nullptr);

/// Runs a whole job into `out`: wav/<out_id>.wav per output, manifest.tsv,
/// report.json. Output bytes are independent of `jobs`. Skip-mode
/// utterances (missing key or empty text) drop all their variants and are
/// tallied; in error mode both conditions abort before any audio I/O.
JobReport run_job(const FragmentDb& db, const SynthesisJob& job,
                  const std::filesystem::path& out, int jobs = 0,
                  bool allow_nonempty_out = false);

/// TSV `<out_id>\t<wav path>\t<transcript>`, rows sorted by out_id.
/// Fields must be tab- and newline-free; transcripts are by construction
/// (CJK only). Zero entries produce an empty file.
void write_manifest(std::vector<ManifestEntry> entries, const std::filesystem::path& path);

/// Parses a manifest back, file order. Inverse of write_manifest.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Text corpus file: one `<utt_id>\t<text>` per line, UTF-8, blank lines
/// ignored. utt_ids must be filename-safe ([A-Za-z0-9._-]) and unique.
std::vector<std::pair<std::string, std::string>> read_text_corpus(
    const std::filesystem::path& path);

}  // namespace pinsynth
