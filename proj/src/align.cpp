#include "pinsynth/align.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "pinsynth/error.hpp"
#include "pinsynth/utf8.hpp"

namespace pinsynth {

namespace {

double parse_time(const std::string& token, const std::string& context,
                  const char* field) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty() || errno == ERANGE ||
      !std::isfinite(value)) {
    throw Error(context + ": non-numeric " + field + " \"" + token + "\"");
  }
  return value;
}

}  // namespace

std::vector<AlignmentSegment> parse_alignment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open alignment file " + path.string());

  std::vector<AlignmentSegment> segments;
  std::vector<int> line_numbers;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    const auto context = path.string() + ":" + std::to_string(line_no);
    std::istringstream fields(line);
    std::string utt, start_tok, dur_tok, char_tok, extra;
    if (!(fields >> utt >> start_tok >> dur_tok >> char_tok)) {
      throw Error(context + ": expected 4 fields <utt_id> <start_sec> <dur_sec> <char>");
    }
    if (fields >> extra) {
      throw Error(context + ": unexpected trailing field \"" + extra + "\"");
    }

    AlignmentSegment seg;
    seg.utt_id = utt;
    seg.start_sec = parse_time(start_tok, context, "start_sec");
    seg.dur_sec = parse_time(dur_tok, context, "dur_sec");
    if (seg.start_sec < 0.0) {
      throw Error(context + ": negative start_sec " + start_tok);
    }
    if (seg.dur_sec <= 0.0) {
      throw Error(context + ": dur_sec must be positive, got " + dur_tok);
    }
    if (!utf8::is_single_codepoint(char_tok)) {
      throw Error(context + ": char field \"" + char_tok +
                  "\" must be a single character");
    }
    std::size_t p = 0;
    seg.ch = utf8::decode_next(char_tok, p);
    segments.push_back(std::move(seg));
    line_numbers.push_back(line_no);
  }

  // Overlap validation per utterance.
  std::map<std::string, std::vector<std::size_t>> by_utt;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    by_utt[segments[i].utt_id].push_back(i);
  }
  std::string overlaps;
  for (auto& [utt, indices] : by_utt) {
    std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return segments[a].start_sec < segments[b].start_sec;
    });
    for (std::size_t k = 1; k < indices.size(); ++k) {
      const AlignmentSegment& prev = segments[indices[k - 1]];
      const AlignmentSegment& cur = segments[indices[k]];
      if (cur.start_sec < prev.start_sec + prev.dur_sec) {
        overlaps += "\n  " + utt + ": line " + std::to_string(line_numbers[indices[k - 1]]) +
                    " [" + std::to_string(prev.start_sec) + ", " +
                    std::to_string(prev.start_sec + prev.dur_sec) + ") overlaps line " +
                    std::to_string(line_numbers[indices[k]]) + " [" +
                    std::to_string(cur.start_sec) + ", " +
                    std::to_string(cur.start_sec + cur.dur_sec) + ")";
      }
    }
  }
  if (!overlaps.empty()) {
    throw Error("overlapping segments in " + path.string() + ":" + overlaps);
  }
  return segments;
}

void write_alignment(const std::vector<AlignmentSegment>& segments,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot create alignment file " + path.string());
  char buf[64];
  for (const AlignmentSegment& seg : segments) {
    std::snprintf(buf, sizeof buf, " %.9f %.9f ", seg.start_sec, seg.dur_sec);
    out << seg.utt_id << buf << utf8::encode(seg.ch) << "\n";
  }
  if (!out) throw Error("I/O failure writing " + path.string());
}

AudioClip slice_fragment(const AudioClip& clip, const AlignmentSegment& seg) {
  const double rate = clip.sample_rate_hz;
  const auto first = static_cast<std::int64_t>(std::llround(seg.start_sec * rate));
  const auto last = static_cast<std::int64_t>(
      std::llround((seg.start_sec + seg.dur_sec) * rate));
  if (first < 0 || last < first || last > clip.length()) {
    throw Error("segment out of range in " + seg.utt_id + ": samples [" +
                std::to_string(first) + ", " + std::to_string(last) +
                ") of " + std::to_string(clip.length()));
  }
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.assign(clip.samples.begin() + first, clip.samples.begin() + last);
  return out;
}

}  // namespace pinsynth
