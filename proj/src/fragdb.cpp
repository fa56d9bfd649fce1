#include "pinsynth/fragdb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "pinsynth/error.hpp"
#include "pinsynth/fsio.hpp"
#include "pinsynth/parallel.hpp"
#include "pinsynth/utf8.hpp"
#include "pinsynth/wav.hpp"

namespace pinsynth {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fragment_rel_path(const PinyinSyllable& key, const std::string& frag_id) {
  return "frag/" + key.str() + "/" + frag_id + ".wav";
}

// <utt>-c<NNNN>: NNNN is the 1-based position in the utterance's aligned
// segment sequence, so an id survives neighbours being dropped.
std::string ordinal_id(const std::string& utt_id, int ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", ordinal);
  return utt_id + "-c" + buf;
}

// Shortest round-trip decimal form, same as the index serialization.
std::string num_str(double v) { return ordered_json(v).dump(); }

const ordered_json& require_field(const ordered_json& rec, const char* name,
                                  const std::string& ctx) {
  const auto it = rec.find(name);
  if (it == rec.end()) {
    throw Error(ctx + ": missing field \"" + std::string(name) + "\"");
  }
  return *it;
}

std::string field_str(const ordered_json& rec, const char* name, const std::string& ctx) {
  const auto& v = require_field(rec, name, ctx);
  if (!v.is_string()) {
    throw Error(ctx + ": field \"" + std::string(name) + "\" must be a string");
  }
  return v.get<std::string>();
}

std::int64_t field_int(const ordered_json& rec, const char* name, const std::string& ctx) {
  const auto& v = require_field(rec, name, ctx);
  if (!v.is_number_integer()) {
    throw Error(ctx + ": field \"" + std::string(name) + "\" must be an integer");
  }
  return v.get<std::int64_t>();
}

double field_double(const ordered_json& rec, const char* name, const std::string& ctx) {
  const auto& v = require_field(rec, name, ctx);
  if (!v.is_number()) {
    throw Error(ctx + ": field \"" + std::string(name) + "\" must be a number");
  }
  return v.get<double>();
}

void write_meta(const fs::path& root, int sample_rate_hz) {
  ordered_json j;
  j["format_version"] = kDbFormatVersion;
  j["sample_rate_hz"] = sample_rate_hz;
  write_text_file(root / "meta.json", j.dump(2) + "\n");
}

void write_index(const fs::path& root, const std::vector<Fragment>& fragments) {
  std::string out;
  for (const Fragment& f : fragments) {
    ordered_json j;
    j["frag_id"] = f.frag_id;
    j["key"] = f.key.str();
    j["source_utt"] = f.source_utt;
    j["source_char"] = f.source_char;
    j["n_samples"] = f.n_samples;
    j["l2_norm"] = f.l2_norm;
    j["path"] = f.rel_path;
    out += j.dump();
    out += '\n';
  }
  write_text_file(root / "index.jsonl", out);
}

void check_rel_path(const std::string& rel, const std::string& ctx) {
  if (rel.empty()) throw Error(ctx + ": empty path");
  const fs::path p(rel);
  if (p.is_absolute()) throw Error(ctx + ": absolute path \"" + rel + "\"");
  for (const auto& part : p) {
    if (part == "..") throw Error(ctx + ": path escapes the database root: \"" + rel + "\"");
  }
}

// Union of the sides' reading tables. Either side may lack one; a
// character both sides map, they must map identically.
std::optional<CharPinyinTable> merge_tables(const CharPinyinTable* ta,
                                            const CharPinyinTable* tb) {
  if (ta == nullptr && tb == nullptr) return std::nullopt;
  if (ta == nullptr) return *tb;
  if (tb == nullptr) return *ta;

  std::vector<std::pair<char32_t, std::vector<PinyinSyllable>>> rows;
  for (const auto& [ch, readings] : ta->entries()) rows.emplace_back(ch, readings);
  for (const auto& [ch, readings] : tb->entries()) {
    const auto* existing = ta->find(ch);
    if (existing == nullptr) {
      rows.emplace_back(ch, readings);
    } else if (*existing != readings) {
      throw Error("cannot merge: reading tables disagree on " + utf8::describe(ch));
    }
  }
  return CharPinyinTable::from_rows(rows);
}

}  // namespace

// Builds the in-memory object from a finished fragment list. Shared by
// build, merge and load so they cannot disagree on indexing.
FragmentDb assemble_db(const std::filesystem::path& root, int sample_rate_hz,
                       std::vector<Fragment> fragments,
                       std::optional<CharPinyinTable> table) {
  FragmentDb db;
  db.root_ = root;
  db.sample_rate_hz_ = sample_rate_hz;
  db.fragments_ = std::move(fragments);
  db.table_ = std::move(table);
  for (std::size_t i = 0; i < db.fragments_.size(); ++i) {
    const Fragment& f = db.fragments_[i];
    if (!db.by_id_.emplace(f.frag_id, i).second) {
      throw Error("duplicate frag_id " + f.frag_id);
    }
    db.by_key_[f.key].push_back(i);
  }
  return db;
}

const CharPinyinTable& FragmentDb::require_table() const {
  if (!table_) {
    throw Error("database at " + root_.string() + " has no reading table (table.tsv)");
  }
  return *table_;
}

void prepare_output_dir(const std::filesystem::path& dir, bool allow_nonempty) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw Error(dir.string() + " exists and is not a directory");
    }
    if (!allow_nonempty && !fs::is_empty(dir)) {
      throw Error("output directory " + dir.string() + " is not empty");
    }
  } else {
    fs::create_directories(dir);
  }
}

const std::vector<std::size_t>* FragmentDb::find_key(const PinyinSyllable& key) const {
  const auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &it->second;
}

std::vector<const Fragment*> FragmentDb::lookup(const PinyinSyllable& key) const {
  std::vector<const Fragment*> out;
  if (const auto* idx = find_key(key)) {
    out.reserve(idx->size());
    for (const std::size_t i : *idx) out.push_back(&fragments_[i]);
  }
  return out;
}

const Fragment* FragmentDb::find_fragment(std::string_view frag_id) const {
  const auto it = by_id_.find(frag_id);
  return it == by_id_.end() ? nullptr : &fragments_[it->second];
}

AudioClip FragmentDb::load_audio(const Fragment& frag) const {
  AudioClip clip = read_wav(root_ / frag.rel_path);
  if (clip.sample_rate_hz != sample_rate_hz_) {
    throw Error("fragment " + frag.frag_id + ": sample rate " +
                std::to_string(clip.sample_rate_hz) + " Hz does not match database rate " +
                std::to_string(sample_rate_hz_) + " Hz");
  }
  return clip;
}

FragmentDb FragmentDb::load(const std::filesystem::path& root) {
  const fs::path meta_path = root / "meta.json";
  ordered_json meta;
  try {
    meta = ordered_json::parse(read_text_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed " + meta_path.string() + ": " + e.what());
  }
  if (!meta.is_object()) throw Error("malformed " + meta_path.string() + ": not a JSON object");

  const std::string meta_ctx = "malformed " + meta_path.string();
  const std::int64_t version = field_int(meta, "format_version", meta_ctx);
  if (version != kDbFormatVersion) {
    throw Error("unsupported format_version " + std::to_string(version) + " in " +
                meta_path.string() + " (this build reads " +
                std::to_string(kDbFormatVersion) + ")");
  }
  const std::int64_t rate = field_int(meta, "sample_rate_hz", meta_ctx);
  if (rate <= 0 || rate > 10'000'000) {
    throw Error(meta_ctx + ": implausible sample_rate_hz " + std::to_string(rate));
  }

  const fs::path index_path = root / "index.jsonl";
  const std::string text = read_text_file(index_path);
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Fragment> fragments;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx =
        "malformed index record at " + index_path.string() + ":" + std::to_string(line_no);

    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ctx + ": " + e.what());
    }
    if (!rec.is_object()) throw Error(ctx + ": not a JSON object");

    Fragment f;
    f.frag_id = field_str(rec, "frag_id", ctx);
    try {
      f.key = PinyinSyllable::parse(field_str(rec, "key", ctx));
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
    f.source_utt = field_str(rec, "source_utt", ctx);
    f.source_char = field_str(rec, "source_char", ctx);
    f.n_samples = field_int(rec, "n_samples", ctx);
    f.l2_norm = field_double(rec, "l2_norm", ctx);
    f.rel_path = field_str(rec, "path", ctx);

    if (f.frag_id.empty()) throw Error(ctx + ": empty frag_id");
    if (!utf8::is_single_codepoint(f.source_char)) {
      throw Error(ctx + ": source_char must be one codepoint");
    }
    if (f.n_samples <= 0) throw Error(ctx + ": n_samples must be positive");
    if (!std::isfinite(f.l2_norm) || f.l2_norm <= 0.0) {
      throw Error(ctx + ": l2_norm must be positive and finite");
    }
    check_rel_path(f.rel_path, ctx);
    fragments.push_back(std::move(f));
  }

  std::optional<CharPinyinTable> table;
  if (fs::exists(root / "table.tsv")) {
    table = CharPinyinTable::load(root / "table.tsv");
  }

  try {
    return assemble_db(root, static_cast<int>(rate), std::move(fragments), std::move(table));
  } catch (const Error& e) {
    throw Error("malformed database at " + root.string() + ": " + e.what());
  }
}

BuildResult build_db(const std::vector<AlignmentSegment>& segments,
                     const UtteranceAudioStore& store, const CharPinyinTable& table,
                     const std::filesystem::path& out, const BuildOptions& options) {
  prepare_output_dir(out, options.allow_nonempty_out);

  BuildReport report;
  report.segments_total = static_cast<std::int64_t>(segments.size());

  std::map<std::string, std::vector<const AlignmentSegment*>> by_utt;
  for (const AlignmentSegment& seg : segments) by_utt[seg.utt_id].push_back(&seg);

  struct PlannedSlice {
    const AlignmentSegment* seg;
    PinyinSyllable key;
    std::string frag_id;
  };
  struct UttPlan {
    std::string utt_id;
    fs::path wav;
    std::vector<PlannedSlice> slices;
  };

  // Resolve readings first so unmapped characters are reported all at
  // once, before any audio is touched.
  std::set<char32_t> unmapped;
  std::vector<UttPlan> plans;
  plans.reserve(by_utt.size());
  for (const auto& [utt_id, segs] : by_utt) {
    UttPlan plan;
    plan.utt_id = utt_id;
    plan.wav = store.wav_path(utt_id);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto* readings = table.find(segs[i]->ch);
      if (readings == nullptr) {
        if (options.on_unmapped == BuildOptions::OnUnmappedChar::kError) {
          unmapped.insert(segs[i]->ch);
        } else {
          ++report.unmapped_dropped;
        }
        continue;
      }
      plan.slices.push_back(
          {segs[i], readings->front(), ordinal_id(utt_id, static_cast<int>(i) + 1)});
    }
    plans.push_back(std::move(plan));
  }
  if (!unmapped.empty()) {
    std::string msg = "unmapped characters:";
    for (const char32_t cp : unmapped) msg += " " + utf8::describe(cp);
    throw Error(msg);
  }

  // Audio prescan: all missing files in one error, then rate agreement.
  std::vector<std::string> missing;
  for (const UttPlan& plan : plans) {
    if (!fs::exists(plan.wav)) missing.push_back(plan.utt_id);
  }
  if (!missing.empty()) {
    std::string msg = "missing utterance audio under " + store.root.string() + ":";
    for (const std::string& id : missing) msg += " " + id;
    throw Error(msg);
  }
  int db_rate = 0;
  std::string rate_utt;
  for (const UttPlan& plan : plans) {
    const WavInfo info = probe_wav(plan.wav);
    if (db_rate == 0) {
      db_rate = info.sample_rate_hz;
      rate_utt = plan.utt_id;
    } else if (info.sample_rate_hz != db_rate) {
      throw Error("sample rate mismatch: utterance " + plan.utt_id + " has " +
                  std::to_string(info.sample_rate_hz) + " Hz, expected " +
                  std::to_string(db_rate) + " Hz (from " + rate_utt + ")");
    }
  }

  // Key directories up front; workers then never race on mkdir.
  std::set<std::string> key_names;
  for (const UttPlan& plan : plans) {
    for (const PlannedSlice& s : plan.slices) key_names.insert(s.key.str());
  }
  for (const std::string& k : key_names) fs::create_directories(out / "frag" / k);

  const int jobs = resolve_jobs(options.jobs);
  const auto n_plans = static_cast<std::int64_t>(plans.size());
  std::vector<std::vector<Fragment>> built(plans.size());
  std::vector<std::int64_t> silent(plans.size(), 0);
  std::vector<std::string> errors(plans.size());

#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (std::int64_t pi = 0; pi < n_plans; ++pi) {
    try {
      const UttPlan& plan = plans[static_cast<std::size_t>(pi)];
      if (plan.slices.empty()) continue;
      const AudioClip audio = read_wav(plan.wav);
      for (const PlannedSlice& s : plan.slices) {
        AudioClip piece = slice_fragment(audio, *s.seg);
        const double norm = l2_norm(piece);
        if (norm == 0.0) {
          ++silent[static_cast<std::size_t>(pi)];
          continue;
        }
        Fragment f;
        f.frag_id = s.frag_id;
        f.key = s.key;
        f.source_utt = plan.utt_id;
        f.source_char = utf8::encode(s.seg->ch);
        f.n_samples = piece.length();
        f.l2_norm = norm;
        f.rel_path = fragment_rel_path(s.key, s.frag_id);
        write_wav(piece, out / f.rel_path);
        built[static_cast<std::size_t>(pi)].push_back(std::move(f));
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(pi)] = e.what();
    }
  }
  for (const std::string& err : errors) {
    if (!err.empty()) throw Error(err);
  }

  std::vector<Fragment> all;
  for (std::vector<Fragment>& v : built) {
    for (Fragment& f : v) all.push_back(std::move(f));
  }
  std::sort(all.begin(), all.end(),
            [](const Fragment& x, const Fragment& y) { return x.frag_id < y.frag_id; });
  for (const std::int64_t s : silent) report.silent_rejected += s;
  report.fragments_kept = static_cast<std::int64_t>(all.size());

  if (db_rate == 0) db_rate = kEmptyDbSampleRateHz;  // nothing was probed
  write_meta(out, db_rate);
  write_index(out, all);
  table.save(out / "table.tsv");
  FragmentDb db = assemble_db(out, db_rate, std::move(all), table);
  report.distinct_keys = static_cast<std::int64_t>(db.keys().size());
  return BuildResult{std::move(db), report};
}

FragmentDb merge_dbs(const FragmentDb& a, const FragmentDb& b,
                     const std::filesystem::path& out, bool allow_nonempty_out) {
  // A fragmentless side imposes no rate constraint.
  if (!a.fragments().empty() && !b.fragments().empty() &&
      a.sample_rate_hz() != b.sample_rate_hz()) {
    throw Error("cannot merge: sample rate " + std::to_string(a.sample_rate_hz()) +
                " Hz vs " + std::to_string(b.sample_rate_hz()) + " Hz");
  }
  const int rate = !a.fragments().empty()   ? a.sample_rate_hz()
                   : !b.fragments().empty() ? b.sample_rate_hz()
                                            : kEmptyDbSampleRateHz;

  std::optional<CharPinyinTable> table = merge_tables(a.table(), b.table());
  prepare_output_dir(out, allow_nonempty_out);

  std::vector<Fragment> all;
  all.reserve(a.fragments().size() + b.fragments().size());
  const auto add = [&](const FragmentDb& src, const char* prefix) {
    for (const Fragment& f : src.fragments()) {
      Fragment nf = f;
      nf.frag_id = std::string(prefix) + "/" + f.frag_id;
      nf.rel_path = fragment_rel_path(nf.key, nf.frag_id);
      const fs::path from = src.root() / f.rel_path;
      const fs::path to = out / nf.rel_path;
      fs::create_directories(to.parent_path());
      try {
        fs::copy_file(from, to, fs::copy_options::overwrite_existing);
      } catch (const fs::filesystem_error& e) {
        throw Error("cannot copy " + from.string() + " to " + to.string() + ": " +
                    e.code().message());
      }
      all.push_back(std::move(nf));
    }
  };
  add(a, "a");
  add(b, "b");

  write_meta(out, rate);
  write_index(out, all);
  if (table) table->save(out / "table.tsv");
  return assemble_db(out, rate, std::move(all), std::move(table));
}

StatsReport db_stats(const FragmentDb& db) {
  StatsReport r;
  r.total_fragments = static_cast<std::int64_t>(db.fragments().size());
  r.distinct_keys = static_cast<std::int64_t>(db.keys().size());
  r.duration_histogram.assign(21, 0);

  std::vector<std::int64_t> per_key;
  per_key.reserve(db.keys().size());
  for (const auto& [key, idx] : db.keys()) {
    per_key.push_back(static_cast<std::int64_t>(idx.size()));
  }
  if (!per_key.empty()) {
    std::sort(per_key.begin(), per_key.end());
    const std::size_t n = per_key.size();
    r.min_fragments_per_key = per_key.front();
    r.max_fragments_per_key = per_key.back();
    r.median_fragments_per_key =
        n % 2 == 1 ? static_cast<double>(per_key[n / 2])
                   : (static_cast<double>(per_key[n / 2 - 1]) + per_key[n / 2]) / 2.0;
  }

  for (const Fragment& f : db.fragments()) {
    r.total_duration_sec += static_cast<double>(f.n_samples) / db.sample_rate_hz();
    const double ms = 1000.0 * static_cast<double>(f.n_samples) / db.sample_rate_hz();
    const auto bin = std::min<std::int64_t>(static_cast<std::int64_t>(ms / 50.0), 20);
    ++r.duration_histogram[static_cast<std::size_t>(bin)];
  }
  return r;
}

ValidationReport validate_db(const FragmentDb& db, int jobs) {
  const std::vector<Fragment>& frags = db.fragments();
  ValidationReport report;
  report.checked = static_cast<std::int64_t>(frags.size());

  std::vector<std::string> reasons(frags.size());
  const int n_jobs = resolve_jobs(jobs);
  const auto n = static_cast<std::int64_t>(frags.size());

#pragma omp parallel for schedule(dynamic) num_threads(n_jobs)
  for (std::int64_t i = 0; i < n; ++i) {
    const Fragment& f = frags[static_cast<std::size_t>(i)];
    std::string& reason = reasons[static_cast<std::size_t>(i)];
    try {
      const AudioClip clip = read_wav(db.root() / f.rel_path);
      if (clip.sample_rate_hz != db.sample_rate_hz()) {
        reason = "sample rate " + std::to_string(clip.sample_rate_hz) +
                 " Hz, database is " + std::to_string(db.sample_rate_hz()) + " Hz";
      } else if (clip.length() != f.n_samples) {
        reason = "sample count " + std::to_string(clip.length()) + ", index says " +
                 std::to_string(f.n_samples);
      } else {
        const double norm = l2_norm(clip);
        const double denom = std::max(std::abs(f.l2_norm), 1e-12);
        if (std::abs(norm - f.l2_norm) / denom > 1e-6) {
          reason = "l2 norm " + num_str(norm) + ", index says " + num_str(f.l2_norm);
        }
      }
    } catch (const std::exception& e) {
      reason = std::string("unreadable: ") + e.what();
    }
  }

  for (std::size_t i = 0; i < frags.size(); ++i) {
    if (!reasons[i].empty()) {
      report.failures.push_back({frags[i].frag_id, std::move(reasons[i])});
    }
  }
  std::sort(report.failures.begin(), report.failures.end(),
            [](const auto& x, const auto& y) { return x.frag_id < y.frag_id; });
  return report;
}

std::string BuildReport::json_str() const {
  ordered_json j;
  j["segments_total"] = segments_total;
  j["fragments_kept"] = fragments_kept;
  j["silent_rejected"] = silent_rejected;
  j["unmapped_dropped"] = unmapped_dropped;
  j["utterances_missing"] = utterances_missing;
  j["distinct_keys"] = distinct_keys;
  return j.dump(2);
}

std::string StatsReport::json_str() const {
  ordered_json j;
  j["distinct_keys"] = distinct_keys;
  j["total_fragments"] = total_fragments;
  j["fragments_per_key"] = {{"min", min_fragments_per_key},
                            {"median", median_fragments_per_key},
                            {"max", max_fragments_per_key}};
  j["total_duration_sec"] = total_duration_sec;
  ordered_json bins = ordered_json::array();
  for (std::size_t i = 0; i < duration_histogram.size(); ++i) {
    ordered_json bin;
    bin["lo_ms"] = static_cast<std::int64_t>(i) * 50;
    if (i + 1 < duration_histogram.size()) {
      bin["hi_ms"] = static_cast<std::int64_t>(i + 1) * 50;
    } else {
      bin["hi_ms"] = nullptr;
    }
    bin["count"] = duration_histogram[i];
    bins.push_back(std::move(bin));
  }
  j["duration_histogram"] = std::move(bins);
  return j.dump(2);
}

std::string ValidationReport::json_str() const {
  ordered_json j;
  j["checked"] = checked;
  j["ok"] = ok();
  ordered_json fails = ordered_json::array();
  for (const Failure& f : failures) {
    fails.push_back({{"frag_id", f.frag_id}, {"reason", f.reason}});
  }
  j["failures"] = std::move(fails);
  return j.dump(2);
}

}  // namespace pinsynth
