// Throughput comparison: the straight-line serial reference against the
// production pipeline, and the whole-job path across worker counts.
// Built only when Google Benchmark is available; run manually:
//
//   build/bench/bench_synth --benchmark_min_time=0.5s

#include <benchmark/benchmark.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "pinsynth/demo.hpp"
#include "pinsynth/fragdb.hpp"
#include "pinsynth/synth.hpp"
#include "pinsynth/synth_reference.hpp"

namespace fs = std::filesystem;
using namespace pinsynth;

namespace {

fs::path make_scratch_dir(const char* tag) {
  std::string tmpl = (fs::temp_directory_path() / (std::string(tag) + ".XXXXXX")).string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  return fs::path(buf.data());
}

struct Setup {
  fs::path root;
  FragmentDb db;
  std::vector<std::pair<std::string, std::string>> texts;
};

const Setup& setup() {
  static Setup s = [] {
    Setup out;
    out.root = make_scratch_dir("pinsynth-bench");
    const DemoCorpus corpus = make_demo_corpus();
    write_demo_corpus(corpus, out.root / "corpus");
    const auto segments = parse_alignment(out.root / "corpus" / "align.txt");
    const auto table = CharPinyinTable::load(out.root / "corpus" / "pinyin_table.tsv");
    out.db = build_db(segments, UtteranceAudioStore{out.root / "corpus" / "wav"}, table,
                      out.root / "db")
                 .db;
    out.texts = corpus.texts;
    return out;
  }();
  return s;
}

void BM_normalize_energy(benchmark::State& state) {
  const std::size_t n_clips = static_cast<std::size_t>(state.range(0));
  std::vector<AudioClip> clips(n_clips);
  Xoshiro256StarStar rng(1);
  for (auto& clip : clips) {
    clip.sample_rate_hz = 16000;
    clip.samples.resize(2000);
    for (auto& s : clip.samples) s = (rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(normalize_energy(clips));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_clips));
}
BENCHMARK(BM_normalize_energy)->Arg(4)->Arg(16)->Arg(64);

// Serial reference: re-reads fragment files and recomputes everything.
void BM_synthesize_reference(benchmark::State& state) {
  const Setup& s = setup();
  const CharPinyinTable& table = s.db.require_table();
  for (auto _ : state) {
    const PseudoUtterance utt = reference_synthesize(
        s.db, s.texts[0].first, s.texts[0].second, table, 42, 1, 10.0, TextPolicy{});
    benchmark::DoNotOptimize(utt.clip.samples.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_synthesize_reference);

// Production single-text path with the shared decode cache.
void BM_synthesize_production(benchmark::State& state) {
  const Setup& s = setup();
  const CharPinyinTable& table = s.db.require_table();
  FragmentAudioCache cache;
  for (auto _ : state) {
    Xoshiro256StarStar rng(derive_stream_seed(42, s.texts[0].first, 1));
    const PseudoUtterance utt =
        synthesize_one(s.db, s.texts[0].second, table, rng, 10.0, TextPolicy{}, &cache);
    benchmark::DoNotOptimize(utt.clip.samples.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_synthesize_production);

// Whole job, 40 outputs, across worker counts.
void BM_run_job(benchmark::State& state) {
  const Setup& s = setup();
  SynthesisJob job;
  job.texts = {s.texts.begin(), s.texts.begin() + 20};
  job.seed = 42;
  job.variants = 2;
  job.gap_ms = 10.0;
  const int jobs = static_cast<int>(state.range(0));

  int iteration = 0;
  for (auto _ : state) {
    const fs::path out =
        s.root / ("job-" + std::to_string(jobs) + "-" + std::to_string(iteration++));
    run_job(s.db, job, out, jobs);
    state.PauseTiming();
    fs::remove_all(out);
    state.ResumeTiming();
  }
  state.SetItemsProcessed(state.iterations() * 40);
}
BENCHMARK(BM_run_job)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
