// pinsynth: build Pinyin-keyed fragment databases from aligned speech and
// synthesize pseudo-speech corpora from them.
//
// Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 validation
// failures found (validate only). Logs go to stderr, data to stdout.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pinsynth/demo.hpp"
#include "pinsynth/error.hpp"
#include "pinsynth/fragdb.hpp"
#include "pinsynth/fsio.hpp"
#include "pinsynth/synth.hpp"

namespace {

using pinsynth::Error;

// Re-throws directory-not-empty errors with the flag that unblocks them.
template <typename Fn>
auto with_force_hint(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.find("is not empty") != std::string::npos) {
      throw Error(msg + " (use --force to overwrite)");
    }
    throw;
  }
}

void print_kv(const char* name, const std::string& value) {
  std::printf("%-18s %s\n", name, value.c_str());
}

void print_kv(const char* name, std::int64_t value) {
  print_kv(name, std::to_string(value));
}

int cmd_build_db(const std::string& align_path, const std::string& audio_dir,
                 const std::string& table_path, const std::string& out_dir,
                 const std::string& on_unmapped, int jobs, bool force) {
  const auto segments = pinsynth::parse_alignment(align_path);
  const auto table = pinsynth::CharPinyinTable::load(table_path);

  pinsynth::BuildOptions options;
  options.on_unmapped = on_unmapped == "skip"
                            ? pinsynth::BuildOptions::OnUnmappedChar::kSkip
                            : pinsynth::BuildOptions::OnUnmappedChar::kError;
  options.jobs = jobs;
  options.allow_nonempty_out = force;

  const pinsynth::BuildResult result = with_force_hint([&] {
    return pinsynth::build_db(segments, pinsynth::UtteranceAudioStore{audio_dir}, table,
                              out_dir, options);
  });

  print_kv("segments", result.report.segments_total);
  print_kv("fragments kept", result.report.fragments_kept);
  print_kv("silent rejected", result.report.silent_rejected);
  print_kv("unmapped dropped", result.report.unmapped_dropped);
  print_kv("distinct keys", result.report.distinct_keys);
  print_kv("sample rate", std::to_string(result.db.sample_rate_hz()) + " Hz");
  pinsynth::write_text_file(std::filesystem::path(out_dir) / "build-report.json",
                            result.report.json_str() + "\n");
  return 0;
}

int cmd_synth(const std::string& db_dir, const std::string& text_path,
              const std::string& out_dir, std::uint64_t seed, int variants,
              double gap_ms, const std::string& on_missing, int jobs, bool force) {
  const pinsynth::FragmentDb db = pinsynth::FragmentDb::load(db_dir);

  pinsynth::SynthesisJob job;
  job.texts = pinsynth::read_text_corpus(text_path);
  job.seed = seed;
  job.variants = variants;
  job.gap_ms = gap_ms;
  job.on_missing_key = on_missing == "skip"
                           ? pinsynth::SynthesisJob::OnMissingKey::kSkipUtterance
                           : pinsynth::SynthesisJob::OnMissingKey::kError;

  const pinsynth::JobReport report =
      with_force_hint([&] { return pinsynth::run_job(db, job, out_dir, jobs, force); });

  print_kv("requested", report.requested);
  print_kv("written", report.written);
  print_kv("skipped", report.skipped);
  if (report.utterances_missing_key > 0) {
    print_kv("  missing key", report.utterances_missing_key);
  }
  if (report.utterances_empty_text > 0) {
    print_kv("  empty text", report.utterances_empty_text);
  }
  return 0;
}

int cmd_stats(const std::string& db_dir, bool json) {
  const pinsynth::FragmentDb db = pinsynth::FragmentDb::load(db_dir);
  const pinsynth::StatsReport stats = pinsynth::db_stats(db);
  if (json) {
    std::printf("%s\n", stats.json_str().c_str());
    return 0;
  }
  print_kv("distinct keys", stats.distinct_keys);
  print_kv("fragments", stats.total_fragments);
  print_kv("per key min", stats.min_fragments_per_key);
  char median[32];
  std::snprintf(median, sizeof median, "%g", stats.median_fragments_per_key);
  print_kv("per key median", std::string(median));
  print_kv("per key max", stats.max_fragments_per_key);
  char dur[32];
  std::snprintf(dur, sizeof dur, "%.2f s", stats.total_duration_sec);
  print_kv("total duration", std::string(dur));
  for (std::size_t i = 0; i < stats.duration_histogram.size(); ++i) {
    if (stats.duration_histogram[i] == 0) continue;
    char label[32];
    if (i + 1 < stats.duration_histogram.size()) {
      std::snprintf(label, sizeof label, "%4zu-%4zu ms", i * 50, (i + 1) * 50);
    } else {
      std::snprintf(label, sizeof label, "%4zu+     ms", i * 50);
    }
    std::printf("%s %lld\n", label,
                static_cast<long long>(stats.duration_histogram[i]));
  }
  return 0;
}

int cmd_validate(const std::string& db_dir, int jobs, bool json) {
  const pinsynth::FragmentDb db = pinsynth::FragmentDb::load(db_dir);
  const pinsynth::ValidationReport report = pinsynth::validate_db(db, jobs);
  if (json) {
    std::printf("%s\n", report.json_str().c_str());
  } else {
    print_kv("checked", report.checked);
    print_kv("failures", static_cast<std::int64_t>(report.failures.size()));
    for (const auto& failure : report.failures) {
      std::printf("  %s: %s\n", failure.frag_id.c_str(), failure.reason.c_str());
    }
  }
  return report.ok() ? 0 : 3;
}

int cmd_coverage(const std::string& db_dir, const std::string& text_path, bool json) {
  const pinsynth::FragmentDb db = pinsynth::FragmentDb::load(db_dir);
  const auto texts = pinsynth::read_text_corpus(text_path);
  const pinsynth::CoverageReport report =
      pinsynth::check_coverage(db, texts, db.require_table(), pinsynth::TextPolicy{});
  if (json) {
    std::printf("%s\n", report.json_str().c_str());
    return 0;
  }
  print_kv("keys needed", report.keys_needed);
  print_kv("keys missing", static_cast<std::int64_t>(report.missing.size()));
  for (const auto& missing : report.missing) {
    std::string chars;
    for (const std::string& ch : missing.example_chars) chars += ch;
    std::printf("  %-8s %lld occurrence(s), e.g. %s\n", missing.key.str().c_str(),
                static_cast<long long>(missing.occurrences), chars.c_str());
  }
  return 0;
}

int cmd_merge(const std::string& db_a, const std::string& db_b,
              const std::string& out_dir, bool force, bool json) {
  const pinsynth::FragmentDb a = pinsynth::FragmentDb::load(db_a);
  const pinsynth::FragmentDb b = pinsynth::FragmentDb::load(db_b);
  const pinsynth::FragmentDb merged =
      with_force_hint([&] { return pinsynth::merge_dbs(a, b, out_dir, force); });
  if (json) {
    std::printf("{\n  \"fragments\": %lld,\n  \"distinct_keys\": %lld,\n"
                "  \"sample_rate_hz\": %d\n}\n",
                static_cast<long long>(merged.fragments().size()),
                static_cast<long long>(merged.keys().size()), merged.sample_rate_hz());
    return 0;
  }
  print_kv("fragments", static_cast<std::int64_t>(merged.fragments().size()));
  print_kv("distinct keys", static_cast<std::int64_t>(merged.keys().size()));
  print_kv("sample rate", std::to_string(merged.sample_rate_hz()) + " Hz");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pinyin fragment databases and concatenative pseudo-speech synthesis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a config file (sections per subcommand)");
  int rc = 0;

  auto* build = app.add_subcommand("build-db", "Slice aligned audio into a fragment database");
  std::string build_align, build_audio, build_table, build_out;
  std::string build_on_unmapped = "error";
  int build_jobs = 0;
  bool build_force = false;
  build->add_option("--align", build_align, "Alignment file (<utt> <start> <dur> <char> per line)")
      ->required();
  build->add_option("--audio-dir", build_audio, "Directory of <utt_id>.wav files")->required();
  build->add_option("--pinyin-table", build_table, "Character reading table (TSV)")->required();
  build->add_option("--out", build_out, "Database directory to create")->required();
  build->add_option("--on-unmapped", build_on_unmapped, "Characters without a reading: error|skip")
      ->check(CLI::IsMember({"error", "skip"}));
  build->add_option("--jobs", build_jobs, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  build->add_flag("--force", build_force, "Write into a non-empty output directory");
  build->callback([&] {
    rc = cmd_build_db(build_align, build_audio, build_table, build_out, build_on_unmapped,
                      build_jobs, build_force);
  });

  auto* synth = app.add_subcommand("synth", "Synthesize pseudo speech for a text corpus");
  std::string synth_db, synth_text, synth_out;
  std::uint64_t synth_seed = 0;
  int synth_variants = 1;
  double synth_gap_ms = 0.0;
  std::string synth_on_missing = "error";
  int synth_jobs = 0;
  bool synth_force = false;
  synth->add_option("--db", synth_db, "Fragment database directory")->required();
  synth->add_option("--text", synth_text, "Text corpus (<utt_id>\\t<text> per line)")->required();
  synth->add_option("--out", synth_out, "Output directory to create")->required();
  synth->add_option("--seed", synth_seed, "Job seed; all randomness flows from it")->required();
  synth->add_option("--variants", synth_variants, "Variants per text line")
      ->check(CLI::PositiveNumber);
  synth->add_option("--gap-ms", synth_gap_ms, "Silence between characters, milliseconds")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--on-missing", synth_on_missing,
                    "Texts needing keys absent from the db: error|skip")
      ->check(CLI::IsMember({"error", "skip"}));
  synth->add_option("--jobs", synth_jobs, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  synth->add_flag("--force", synth_force, "Write into a non-empty output directory");
  synth->callback([&] {
    rc = cmd_synth(synth_db, synth_text, synth_out, synth_seed, synth_variants, synth_gap_ms,
                   synth_on_missing, synth_jobs, synth_force);
  });

  auto* stats = app.add_subcommand("stats", "Key and duration statistics for a database");
  std::string stats_db;
  bool stats_json = false;
  stats->add_option("--db", stats_db, "Fragment database directory")->required();
  stats->add_flag("--json", stats_json, "Machine-readable output");
  stats->callback([&] { rc = cmd_stats(stats_db, stats_json); });

  auto* validate = app.add_subcommand("validate", "Re-check every fragment on disk");
  std::string validate_db;
  int validate_jobs = 0;
  bool validate_json = false;
  validate->add_option("--db", validate_db, "Fragment database directory")->required();
  validate->add_option("--jobs", validate_jobs, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  validate->add_flag("--json", validate_json, "Machine-readable output");
  validate->callback([&] { rc = cmd_validate(validate_db, validate_jobs, validate_json); });

  auto* coverage = app.add_subcommand("coverage", "Keys a text corpus needs but the db lacks");
  std::string coverage_db, coverage_text;
  bool coverage_json = false;
  coverage->add_option("--db", coverage_db, "Fragment database directory")->required();
  coverage->add_option("--text", coverage_text, "Text corpus (<utt_id>\\t<text> per line)")
      ->required();
  coverage->add_flag("--json", coverage_json, "Machine-readable output");
  coverage->callback([&] { rc = cmd_coverage(coverage_db, coverage_text, coverage_json); });

  auto* merge = app.add_subcommand("merge", "Union two databases into a new one");
  std::string merge_a, merge_b, merge_out;
  bool merge_force = false;
  bool merge_json = false;
  merge->add_option("--db-a", merge_a, "First database")->required();
  merge->add_option("--db-b", merge_b, "Second database")->required();
  merge->add_option("--out", merge_out, "Merged database directory to create")->required();
  merge->add_flag("--force", merge_force, "Write into a non-empty output directory");
  merge->add_flag("--json", merge_json, "Machine-readable output");
  merge->callback([&] { rc = cmd_merge(merge_a, merge_b, merge_out, merge_force, merge_json); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
