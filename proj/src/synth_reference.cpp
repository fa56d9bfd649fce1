#include "pinsynth/synth_reference.hpp"

#include <cmath>
#include <vector>

#include "pinsynth/error.hpp"
#include "pinsynth/rng.hpp"
#include "pinsynth/utf8.hpp"
#include "pinsynth/wav.hpp"

namespace pinsynth {

PseudoUtterance reference_synthesize(const FragmentDb& db, std::string_view utt_id,
                                     std::string_view text, const CharPinyinTable& table,
                                     std::uint64_t job_seed, int variant, double gap_ms,
                                     const TextPolicy& policy) {
  // Character pass: strip, label, or keep a silence slot.
  struct Slot {
    bool labeled;
    char32_t ch;
    PinyinSyllable key;
  };
  std::vector<Slot> slots;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::decode_next(text, pos);
    const bool cjk = utf8::is_cjk_ideograph(cp);
    if (!cjk && policy.strip_non_cjk) continue;
    const std::vector<PinyinSyllable>* readings = cjk ? table.find(cp) : nullptr;
    if (readings != nullptr) {
      slots.push_back({true, cp, readings->front()});
    } else if (policy.on_unmapped == OnUnmapped::kError) {
      throw Error("unmapped characters: " + utf8::describe(cp));
    } else if (policy.on_unmapped == OnUnmapped::kSubstituteSilence) {
      slots.push_back({false, cp, {}});
    }
  }

  // Fragment draws: one per labeled slot, in text order.
  Xoshiro256StarStar rng(
      derive_stream_seed(job_seed, utt_id, static_cast<std::uint64_t>(variant)));
  std::vector<const Fragment*> picks;
  std::vector<std::vector<double>> clips;
  for (const Slot& slot : slots) {
    if (!slot.labeled) continue;
    const std::vector<const Fragment*> list = db.lookup(slot.key);
    if (list.empty()) throw Error("no fragments for key " + slot.key.str());
    const Fragment* frag = list[rng.uniform_index(list.size())];
    picks.push_back(frag);
    clips.push_back(read_wav(db.root() / frag->rel_path).samples);
  }
  if (picks.empty()) {
    throw Error("nothing to synthesize: no labeled characters after policy");
  }

  // Energy equalization: scale every clip to the mean of the norms.
  std::vector<double> norms;
  for (const std::vector<double>& clip : clips) {
    double sum_sq = 0.0;
    for (const double s : clip) sum_sq += s * s;
    const double norm = std::sqrt(sum_sq);
    if (norm == 0.0) throw Error("silent fragment");
    norms.push_back(norm);
  }
  double norm_sum = 0.0;
  for (const double n : norms) norm_sum += n;
  const double target = norm_sum / static_cast<double>(norms.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const double scale = target / norms[i];
    for (double& s : clips[i]) s = s * scale;
  }

  // Splice: zero gap between consecutive slots, fixed span for silence.
  const int rate = db.sample_rate_hz();
  const auto gap = std::llround(gap_ms * rate / 1000.0);
  const auto silence = std::llround(kUnmappedSilenceSec * rate);

  PseudoUtterance out;
  out.out_id = std::string(utt_id) + "-v" + std::to_string(variant);
  out.clip.sample_rate_hz = rate;
  std::size_t next_clip = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i > 0) {
      for (long long g = 0; g < gap; ++g) out.clip.samples.push_back(0.0);
    }
    if (slots[i].labeled) {
      const std::vector<double>& clip = clips[next_clip++];
      out.clip.samples.insert(out.clip.samples.end(), clip.begin(), clip.end());
      out.transcript += utf8::encode(slots[i].ch);
    } else {
      for (long long g = 0; g < silence; ++g) out.clip.samples.push_back(0.0);
    }
  }
  for (const Fragment* frag : picks) out.fragment_trace.push_back(frag->frag_id);
  out.target_energy = target;
  return out;
}

}  // namespace pinsynth
