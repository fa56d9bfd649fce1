// The Pinyin-keyed fragment database: character-length audio clips merged
// under their pronunciation key, persisted as plain files.
//
// On-disk layout under a database root:
//
//   meta.json      {"format_version":1,"sample_rate_hz":16000}
//   index.jsonl    one record per fragment:
//                  {"frag_id":...,"key":"jia1","source_utt":...,
//                   "source_char":...,"n_samples":...,"l2_norm":...,
//                   "path":"frag/jia1/<frag_id>.wav"}
//   table.tsv      the reading table the build keyed fragments with
//   frag/<key>/    fragment audio, one PCM16 mono WAV each
//
// The line-oriented index keeps the database greppable and diffable;
// loaders reject unknown format versions. Carrying the reading table
// inside the database pins synthesis to the exact character-to-key
// convention the fragments were built under; resolving against any other
// table could silently relabel polyphones.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pinsynth/align.hpp"
#include "pinsynth/audio.hpp"
#include "pinsynth/pinyin.hpp"

namespace pinsynth {

inline constexpr int kDbFormatVersion = 1;

/// Rate recorded for a database that holds no fragments (nothing to probe
/// a real rate from). Merging treats a fragmentless side as rateless.
inline constexpr int kEmptyDbSampleRateHz = 16000;

/// One character-length clip in the database. The L2 norm is cached at
/// build time as a fast path for stats and planning and as a checksum;
/// synthesis still decodes the samples at splice time.
struct Fragment {
  std::string frag_id;
  PinyinSyllable key;
  std::string source_utt;
  std::string source_char;  // UTF-8, one codepoint
  std::int64_t n_samples = 0;
  double l2_norm = 0.0;
  std::string rel_path;  // "frag/<key>/<frag_id>.wav", relative to the root

  bool operator==(const Fragment&) const = default;
};

struct BuildReport {
  std::int64_t segments_total = 0;
  std::int64_t fragments_kept = 0;
  std::int64_t silent_rejected = 0;
  std::int64_t unmapped_dropped = 0;
  std::int64_t utterances_missing = 0;  // missing audio aborts the build, so 0 on success
  std::int64_t distinct_keys = 0;

  std::string json_str() const;
};

struct StatsReport {
  std::int64_t distinct_keys = 0;
  std::int64_t total_fragments = 0;
  std::int64_t min_fragments_per_key = 0;
  double median_fragments_per_key = 0.0;
  std::int64_t max_fragments_per_key = 0;
  double total_duration_sec = 0.0;
  /// Fragment duration counts in 50 ms bins, [0,50) .. [950,1000), then
  /// one overflow bin for >= 1000 ms. Always 21 entries.
  std::vector<std::int64_t> duration_histogram;

  std::string json_str() const;
};

struct ValidationReport {
  struct Failure {
    std::string frag_id;
    std::string reason;
  };

  std::int64_t checked = 0;
  std::vector<Failure> failures;  // sorted by frag_id

  bool ok() const { return failures.empty(); }
  std::string json_str() const;
};

struct BuildOptions {
  enum class OnUnmappedChar { kError, kSkip };
  OnUnmappedChar on_unmapped = OnUnmappedChar::kError;
  /// Worker count for slicing and fragment writes; 0 = all cores.
  int jobs = 0;
  /// Permit writing into a non-empty output directory.
  bool allow_nonempty_out = false;
};

/// Loaded database. Immutable and freely shareable across threads; audio
/// files are not touched at load time (validate_db checks them).
class FragmentDb {
 public:
  static FragmentDb load(const std::filesystem::path& root);

  int sample_rate_hz() const { return sample_rate_hz_; }
  const std::filesystem::path& root() const { return root_; }

  /// All fragments in index order.
  const std::vector<Fragment>& fragments() const { return fragments_; }

  /// Indices into fragments() for one key, build order; nullptr if absent.
  const std::vector<std::size_t>* find_key(const PinyinSyllable& key) const;

  /// Fragment list for a key; empty when absent. Order is stable across
  /// loads (index file order).
  std::vector<const Fragment*> lookup(const PinyinSyllable& key) const;

  const Fragment* find_fragment(std::string_view frag_id) const;

  /// Decodes one fragment's audio; throws if the file is unreadable or
  /// its sample rate disagrees with the database.
  AudioClip load_audio(const Fragment& frag) const;

  const std::map<PinyinSyllable, std::vector<std::size_t>>& keys() const {
    return by_key_;
  }

  /// The stored reading table, or nullptr for a root without table.tsv.
  const CharPinyinTable* table() const { return table_ ? &*table_ : nullptr; }

  /// Stored reading table; throws when the database has none (synthesis
  /// and coverage cannot run without it).
  const CharPinyinTable& require_table() const;

 private:
  friend FragmentDb assemble_db(const std::filesystem::path& root, int sample_rate_hz,
                                std::vector<Fragment> fragments,
                                std::optional<CharPinyinTable> table);

  std::filesystem::path root_;
  int sample_rate_hz_ = 0;
  std::vector<Fragment> fragments_;
  std::map<PinyinSyllable, std::vector<std::size_t>> by_key_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::optional<CharPinyinTable> table_;
};

/// Builds a database from alignment segments: slice each segment from its
/// utterance audio, key it by the character's primary reading, reject
/// silent slices, write fragment WAVs, the index and the table snapshot.
/// Deterministic for fixed inputs regardless of worker count. An empty
/// segment list yields a valid empty database.
///
/// Missing or unreadable utterance audio aborts the build naming every
/// missing utterance. Unmapped characters follow options.on_unmapped.
struct BuildResult {
  FragmentDb db;
  BuildReport report;
};
BuildResult build_db(const std::vector<AlignmentSegment>& segments,
                     const UtteranceAudioStore& store, const CharPinyinTable& table,
                     const std::filesystem::path& out, const BuildOptions& options = {});

/// Union of two databases into a fresh root. Fragment ids are
/// re-namespaced ("a/...", "b/...") to stay unique; per-key lists hold
/// a's fragments then b's. Sample rates must match unless a side is
/// fragmentless. Reading tables are unioned; a character mapped
/// differently by the two sides is an error.
FragmentDb merge_dbs(const FragmentDb& a, const FragmentDb& b,
                     const std::filesystem::path& out, bool allow_nonempty_out = false);

StatsReport db_stats(const FragmentDb& db);

/// Re-checks every fragment on disk: readable, rate and sample count as
/// indexed, cached norm within 1e-6 relative of a recomputation. Failures
/// are report entries, not exceptions.
ValidationReport validate_db(const FragmentDb& db, int jobs = 0);

/// Creates `dir` if needed and enforces that it is empty unless
/// `allow_nonempty` is set. Shared by every command that writes a tree.
void prepare_output_dir(const std::filesystem::path& dir, bool allow_nonempty);

}  // namespace pinsynth
