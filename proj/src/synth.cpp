#include "pinsynth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

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

constexpr std::size_t kCoverageExampleCap = 5;

bool filename_safe(std::string_view id) {
  if (id.empty()) return false;
  for (const char c : id) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void check_utt_id(const std::string& id, const std::string& where) {
  if (!filename_safe(id)) {
    throw Error(where + ": utt_id \"" + id +
                "\" is not filename-safe (allowed: A-Z a-z 0-9 . _ -)");
  }
}

std::string variant_id(const std::string& utt_id, int variant) {
  return utt_id + "-v" + std::to_string(variant);
}

AudioClip silence_span(int sample_rate_hz) {
  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  const auto n = std::llround(kUnmappedSilenceSec * sample_rate_hz);
  clip.samples.assign(static_cast<std::size_t>(n), 0.0);
  return clip;
}

void check_manifest_field(const std::string& value, const char* name,
                          const std::string& out_id) {
  if (value.find_first_of("\t\n\r") != std::string::npos) {
    throw Error("manifest entry " + (out_id.empty() ? std::string("?") : out_id) +
                ": " + name + " contains a tab or newline");
  }
}

}  // namespace

std::shared_ptr<const AudioClip> FragmentAudioCache::get(const FragmentDb& db,
                                                         const Fragment& frag) {
  {
    const std::lock_guard<std::mutex> lock(mu_);
    const auto it = cache_.find(&frag);
    if (it != cache_.end()) return it->second;
  }
  auto clip = std::make_shared<const AudioClip>(db.load_audio(frag));
  const std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(&frag, std::move(clip)).first->second;
}

CoverageReport check_coverage(const FragmentDb& db,
                              const std::vector<std::pair<std::string, std::string>>& texts,
                              const CharPinyinTable& table, const TextPolicy& policy) {
  // Coverage is about keys, and unmapped characters need none; run the
  // text pass in skip mode so policy errors stay with synthesis.
  TextPolicy scan = policy;
  scan.on_unmapped = OnUnmapped::kSkip;

  struct Need {
    std::int64_t occurrences = 0;
    std::set<char32_t> chars;
  };
  std::map<PinyinSyllable, Need> needed;
  for (const auto& [utt_id, text] : texts) {
    const TextKeys tk = text_to_keys(table, text, scan);
    for (const auto& item : tk.items) {
      if (item.kind != TextKeys::Item::Kind::kLabeled) continue;
      Need& need = needed[item.key];
      ++need.occurrences;
      need.chars.insert(item.ch);
    }
  }

  CoverageReport report;
  report.keys_needed = static_cast<std::int64_t>(needed.size());
  for (const auto& [key, need] : needed) {
    if (db.find_key(key) != nullptr) continue;
    CoverageReport::MissingKey missing;
    missing.key = key;
    missing.occurrences = need.occurrences;
    for (const char32_t ch : need.chars) {
      if (missing.example_chars.size() >= kCoverageExampleCap) break;
      missing.example_chars.push_back(utf8::encode(ch));
    }
    report.missing.push_back(std::move(missing));
  }
  return report;
}

std::vector<const Fragment*> select_fragments(const FragmentDb& db,
                                              std::span<const PinyinSyllable> keys,
                                              Xoshiro256StarStar& rng) {
  std::vector<const Fragment*> out;
  out.reserve(keys.size());
  for (const PinyinSyllable& key : keys) {
    const auto* indices = db.find_key(key);
    if (indices == nullptr) {
      throw Error("no fragments for key " + key.str());
    }
    const std::uint64_t pick = rng.uniform_index(indices->size());
    out.push_back(&db.fragments()[(*indices)[pick]]);
  }
  return out;
}

PseudoUtterance synthesize_one(const FragmentDb& db, std::string_view text,
                               const CharPinyinTable& table, Xoshiro256StarStar& rng,
                               double gap_ms, const TextPolicy& policy,
                               FragmentAudioCache* cache) {
  const TextKeys tk = text_to_keys(table, text, policy);
  if (tk.labeled_count() == 0) {
    throw Error("nothing to synthesize: no labeled characters after policy");
  }

  const std::vector<PinyinSyllable> keys = tk.keys();
  const std::vector<const Fragment*> picks = select_fragments(db, keys, rng);

  std::vector<AudioClip> labeled;
  labeled.reserve(picks.size());
  for (const Fragment* frag : picks) {
    labeled.push_back(cache ? *cache->get(db, *frag) : db.load_audio(*frag));
  }
  NormalizationResult norm = normalize_energy(labeled);

  // Elements in text order: normalized fragments where characters were
  // labeled, fixed silence spans where the policy kept a gap.
  std::vector<AudioClip> elements;
  elements.reserve(tk.items.size());
  std::size_t next_labeled = 0;
  for (const auto& item : tk.items) {
    if (item.kind == TextKeys::Item::Kind::kLabeled) {
      elements.push_back(std::move(norm.clips[next_labeled++]));
    } else {
      elements.push_back(silence_span(db.sample_rate_hz()));
    }
  }

  PseudoUtterance out;
  out.clip = concatenate(elements, gap_ms);
  out.transcript = tk.transcript();
  out.fragment_trace.reserve(picks.size());
  for (const Fragment* frag : picks) out.fragment_trace.push_back(frag->frag_id);
  out.target_energy = norm.target_energy;
  return out;
}

JobReport run_job(const FragmentDb& db, const SynthesisJob& job,
                  const std::filesystem::path& out, int jobs,
                  bool allow_nonempty_out) {
  if (job.variants < 1) throw Error("variants must be at least 1");
  if (job.gap_ms < 0.0) throw Error("gap_ms must be non-negative");

  const CharPinyinTable& table = db.require_table();

  std::set<std::string> seen_ids;
  for (const auto& [utt_id, text] : job.texts) {
    check_utt_id(utt_id, "synthesis job");
    if (!seen_ids.insert(utt_id).second) {
      throw Error("duplicate utt_id " + utt_id);
    }
  }

  JobReport report;
  report.requested = static_cast<std::int64_t>(job.texts.size()) * job.variants;

  // Classify utterances before touching audio: text errors and coverage
  // gaps surface here, completely, or not at all.
  struct Active {
    const std::string* utt_id;
    const std::string* text;
  };
  std::vector<Active> active;
  std::set<PinyinSyllable> missing_keys;
  for (const auto& [utt_id, text] : job.texts) {
    TextKeys tk;
    try {
      tk = text_to_keys(table, text, job.text_policy);
    } catch (const Error& e) {
      throw Error("utterance " + utt_id + ": " + e.what());
    }

    if (tk.labeled_count() == 0) {
      if (job.on_missing_key == SynthesisJob::OnMissingKey::kError) {
        throw Error("utterance " + utt_id +
                    ": nothing to synthesize: no labeled characters after policy");
      }
      ++report.utterances_empty_text;
      report.skipped += job.variants;
      continue;
    }

    std::set<PinyinSyllable> utt_missing;
    for (const PinyinSyllable& key : tk.keys()) {
      if (db.find_key(key) == nullptr) utt_missing.insert(key);
    }
    if (!utt_missing.empty()) {
      if (job.on_missing_key == SynthesisJob::OnMissingKey::kError) {
        missing_keys.insert(utt_missing.begin(), utt_missing.end());
        continue;
      }
      ++report.utterances_missing_key;
      report.skipped += job.variants;
      continue;
    }
    active.push_back({&utt_id, &text});
  }
  if (!missing_keys.empty()) {
    std::string msg = "missing keys in database:";
    for (const PinyinSyllable& key : missing_keys) msg += " " + key.str();
    throw Error(msg);
  }

  prepare_output_dir(out, allow_nonempty_out);
  fs::create_directories(out / "wav");

  struct Item {
    const Active* utt;
    int variant;
  };
  std::vector<Item> items;
  items.reserve(active.size() * static_cast<std::size_t>(job.variants));
  for (const Active& utt : active) {
    for (int k = 1; k <= job.variants; ++k) items.push_back({&utt, k});
  }

  FragmentAudioCache cache;
  const int n_jobs = resolve_jobs(jobs);
  const auto n_items = static_cast<std::int64_t>(items.size());
  std::vector<ManifestEntry> entries(items.size());
  std::vector<std::string> errors(items.size());

#pragma omp parallel for schedule(dynamic) num_threads(n_jobs)
  for (std::int64_t i = 0; i < n_items; ++i) {
    const Item& item = items[static_cast<std::size_t>(i)];
    try {
      Xoshiro256StarStar rng(
          derive_stream_seed(job.seed, *item.utt->utt_id,
                             static_cast<std::uint64_t>(item.variant)));
      PseudoUtterance p = synthesize_one(db, *item.utt->text, table, rng, job.gap_ms,
                                         job.text_policy, &cache);
      p.out_id = variant_id(*item.utt->utt_id, item.variant);
      const std::string rel = "wav/" + p.out_id + ".wav";
      write_wav(p.clip, out / rel);
      entries[static_cast<std::size_t>(i)] = {p.out_id, rel, p.transcript};
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] =
          variant_id(*item.utt->utt_id, item.variant) + ": " + e.what();
    }
  }
  for (const std::string& err : errors) {
    if (!err.empty()) {
      throw Error(err + " (output directory " + out.string() + " is incomplete)");
    }
  }

  report.written = n_items;
  write_manifest(entries, out / "manifest.tsv");
  write_text_file(out / "report.json", report.json_str() + "\n");
  return report;
}

void write_manifest(std::vector<ManifestEntry> entries, const std::filesystem::path& path) {
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& x, const ManifestEntry& y) { return x.out_id < y.out_id; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].out_id == entries[i - 1].out_id) {
      throw Error("duplicate manifest out_id " + entries[i].out_id);
    }
  }
  std::string out;
  for (const ManifestEntry& e : entries) {
    if (e.out_id.empty()) throw Error("manifest entry with empty out_id");
    check_manifest_field(e.out_id, "out_id", e.out_id);
    check_manifest_field(e.wav_path, "wav_path", e.out_id);
    check_manifest_field(e.transcript, "transcript", e.out_id);
    out += e.out_id;
    out += '\t';
    out += e.wav_path;
    out += '\t';
    out += e.transcript;
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<ManifestEntry> entries;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                                       : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos) {
      throw Error("malformed manifest at " + path.string() + ":" +
                  std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    entries.push_back({line.substr(0, tab1), line.substr(tab1 + 1, tab2 - tab1 - 1),
                       line.substr(tab2 + 1)});
  }
  return entries;
}

std::vector<std::pair<std::string, std::string>> read_text_corpus(
    const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<std::string, std::string>> out;
  std::map<std::string, std::size_t> first_line;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("malformed text corpus at " + where +
                  ": expected <utt_id><TAB><text>");
    }
    std::string utt_id = line.substr(0, tab);
    check_utt_id(utt_id, where);
    const auto [it, inserted] = first_line.emplace(utt_id, line_no);
    if (!inserted) {
      throw Error("duplicate utt_id \"" + utt_id + "\" at " + where + " (first at line " +
                  std::to_string(it->second) + ")");
    }
    out.emplace_back(std::move(utt_id), line.substr(tab + 1));
  }
  return out;
}

std::string CoverageReport::json_str() const {
  ordered_json j;
  j["complete"] = complete();
  j["keys_needed"] = keys_needed;
  ordered_json miss = ordered_json::array();
  for (const MissingKey& m : missing) {
    ordered_json entry;
    entry["key"] = m.key.str();
    entry["occurrences"] = m.occurrences;
    entry["example_chars"] = m.example_chars;
    miss.push_back(std::move(entry));
  }
  j["missing"] = std::move(miss);
  return j.dump(2);
}

std::string JobReport::json_str() const {
  ordered_json j;
  j["requested"] = requested;
  j["written"] = written;
  j["skipped"] = skipped;
  j["skip_reasons"] = {{"missing_key", utterances_missing_key},
                       {"empty_text", utterances_empty_text}};
  return j.dump(2);
}

}  // namespace pinsynth
