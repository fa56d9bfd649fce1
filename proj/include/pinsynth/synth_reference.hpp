// Straight-line mirror of one synthesis output, kept as an oracle for the
// production path. No cache, no parallelism, no shared pipeline helpers:
// each step is re-derived here from the documented rules (same RNG
// primitives, same arithmetic order), so equivalence tests compare two
// independently written realizations of the same contract, byte for byte.

#pragma once

#include <cstdint>
#include <string_view>

#include "pinsynth/fragdb.hpp"
#include "pinsynth/pinyin.hpp"
#include "pinsynth/synth.hpp"

namespace pinsynth {

/// What run_job produces for (utt_id, variant), recomputed naively.
/// Fragment WAVs are re-read from disk on every use.
PseudoUtterance reference_synthesize(const FragmentDb& db, std::string_view utt_id,
                                     std::string_view text, const CharPinyinTable& table,
                                     std::uint64_t job_seed, int variant, double gap_ms,
                                     const TextPolicy& policy);

}  // namespace pinsynth
