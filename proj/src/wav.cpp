#include "pinsynth/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pinsynth/error.hpp"

namespace pinsynth {

namespace {

constexpr double kQuantScale = 32768.0;
constexpr double kClampHi = 32767.0 / 32768.0;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::vector<char>& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

[[noreturn]] void malformed(const std::filesystem::path& path, const std::string& why) {
  throw Error("malformed WAV file " + path.string() + ": " + why);
}

[[noreturn]] void unsupported(const std::filesystem::path& path, const std::string& field) {
  throw Error("unsupported format in " + path.string() + ": " + field);
}

struct ChunkLayout {
  std::uint32_t sample_rate = 0;
  std::streamoff data_pos = 0;
  std::uint32_t data_size = 0;
};

// Walks the RIFF chunk list, validates the fmt chunk and locates the data
// payload without reading it. Unknown chunks are skipped; odd-sized chunks
// carry a pad byte.
ChunkLayout scan_chunks(std::ifstream& in, const std::filesystem::path& path) {
  in.seekg(0, std::ios::end);
  const std::streamoff file_size = in.tellg();
  in.seekg(0, std::ios::beg);

  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), sizeof riff)) {
    malformed(path, "truncated RIFF header");
  }
  if (std::memcmp(riff, "RIFF", 4) != 0) malformed(path, "missing RIFF tag");
  if (std::memcmp(riff + 8, "WAVE", 4) != 0) malformed(path, "missing WAVE tag");

  bool have_fmt = false;
  bool have_data = false;
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits_per_sample = 0;
  ChunkLayout layout;

  unsigned char chunk_hdr[8];
  while (in.read(reinterpret_cast<char*>(chunk_hdr), sizeof chunk_hdr)) {
    const std::uint32_t chunk_size = read_u32(chunk_hdr + 4);
    if (std::memcmp(chunk_hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) malformed(path, "fmt chunk shorter than 16 bytes");
      std::vector<unsigned char> fmt(chunk_size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), chunk_size)) {
        malformed(path, "truncated fmt chunk");
      }
      format_tag = read_u16(fmt.data() + 0);
      channels = read_u16(fmt.data() + 2);
      layout.sample_rate = read_u32(fmt.data() + 4);
      bits_per_sample = read_u16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk_hdr, "data", 4) == 0) {
      layout.data_pos = in.tellg();
      layout.data_size = chunk_size;
      have_data = true;
      if (!in.seekg(chunk_size, std::ios::cur)) malformed(path, "truncated data chunk");
    } else {
      // Unknown chunk: skip the payload.
      if (!in.seekg(chunk_size, std::ios::cur)) malformed(path, "truncated chunk");
    }
    // RIFF pads odd-sized chunks to even length.
    if (chunk_size % 2 == 1) in.seekg(1, std::ios::cur);
  }
  in.clear();  // loop always ends at EOF

  if (!have_fmt) malformed(path, "missing fmt chunk");
  if (!have_data) malformed(path, "missing data chunk");
  if (format_tag != 1) {
    unsupported(path, "audio_format=" + std::to_string(format_tag) + " (want PCM=1)");
  }
  if (channels != 1) {
    unsupported(path, "channels=" + std::to_string(channels) + " (want mono=1)");
  }
  if (bits_per_sample != 16) {
    unsupported(path, "bits_per_sample=" + std::to_string(bits_per_sample) + " (want 16)");
  }
  if (layout.sample_rate == 0) malformed(path, "sample_rate=0");
  if (layout.data_size % 2 != 0) malformed(path, "odd data chunk size for 16-bit samples");
  // seekg past EOF does not fail, so verify the payload really fits.
  if (layout.data_pos + static_cast<std::streamoff>(layout.data_size) > file_size) {
    malformed(path, "truncated data chunk");
  }
  return layout;
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAV file " + path.string());
  const ChunkLayout layout = scan_chunks(in, path);

  std::vector<unsigned char> data(layout.data_size);
  if (layout.data_size > 0) {
    if (!in.seekg(layout.data_pos) ||
        !in.read(reinterpret_cast<char*>(data.data()), layout.data_size)) {
      malformed(path, "truncated data chunk");
    }
  }

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(layout.sample_rate);
  clip.samples.reserve(data.size() / 2);
  for (std::size_t i = 0; i < data.size(); i += 2) {
    const auto raw = static_cast<std::int16_t>(read_u16(data.data() + i));
    clip.samples.push_back(static_cast<double>(raw) / kQuantScale);
  }
  return clip;
}

WavInfo probe_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAV file " + path.string());
  const ChunkLayout layout = scan_chunks(in, path);
  return WavInfo{static_cast<int>(layout.sample_rate),
                 static_cast<std::int64_t>(layout.data_size / 2)};
}

std::int16_t quantize_sample(double sample) {
  const double clamped = std::clamp(sample, -1.0, kClampHi);
  return static_cast<std::int16_t>(std::llround(clamped * kQuantScale));
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  if (clip.sample_rate_hz <= 0) {
    throw Error("write_wav: invalid sample rate " + std::to_string(clip.sample_rate_hz));
  }
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    if (!std::isfinite(clip.samples[i])) {
      throw Error("write_wav: non-finite sample at index " + std::to_string(i));
    }
  }

  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_size = n * 2;

  std::vector<char> bytes;
  bytes.reserve(44 + data_size);
  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  put_u32(bytes, 36 + data_size);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E'});
  bytes.insert(bytes.end(), {'f', 'm', 't', ' '});
  put_u32(bytes, 16);
  put_u16(bytes, 1);  // PCM
  put_u16(bytes, 1);  // mono
  put_u32(bytes, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_u32(bytes, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);  // byte rate
  put_u16(bytes, 2);   // block align
  put_u16(bytes, 16);  // bits per sample
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  put_u32(bytes, data_size);
  for (const double s : clip.samples) {
    put_u16(bytes, static_cast<std::uint16_t>(quantize_sample(s)));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create WAV file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("I/O failure writing WAV file " + path.string());
}

}  // namespace pinsynth
