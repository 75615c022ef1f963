#include "bregpr/wav.hpp"

#include "bregpr/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

namespace bregpr {

namespace {

constexpr std::uint16_t format_pcm = 1;
constexpr std::uint16_t format_float = 3;
constexpr std::uint16_t format_extensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p)
{
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p)
{
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v)
{
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag)
{
  out.insert(out.end(), tag, tag + 4);
}

} // namespace

int quantize_pcm16(double sample)
{
  const double scaled = std::nearbyint(sample * 32768.0);
  return static_cast<int>(std::clamp(scaled, -32768.0, 32767.0));
}

Signal load_wav(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAV file " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const auto where = " in " + path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error("malformed header: not a RIFF/WAVE file" + where);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a bogus size on the final data chunk.
      if (std::memcmp(chunk, "data", 4) != 0)
        throw Error("malformed header: truncated chunk" + where);
    }
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw Error("malformed header: short fmt chunk" + where);
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == format_extensible) {
        if (avail < 26) throw Error("malformed header: short extensible fmt" + where);
        format = read_u16(chunk + 32);
      }
      have_fmt = true;
    }
    else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw Error("malformed header: missing fmt chunk" + where);
  if (!data) throw Error("malformed header: missing data chunk" + where);
  if (channels != 1)
    throw Error("mono required: file has " + std::to_string(channels) +
                " channels" + where);
  if (rate == 0) throw Error("malformed header: zero sample rate" + where);

  Signal out;
  out.sample_rate = static_cast<int>(rate);
  if (format == format_pcm && bits == 16) {
    const std::size_t n = data_size / 2;
    out.samples.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto code = static_cast<std::int16_t>(read_u16(data + 2 * i));
      out.samples[static_cast<Eigen::Index>(i)] = code / 32768.0;
    }
  }
  else if (format == format_float && bits == 32) {
    const std::size_t n = data_size / 4;
    out.samples.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t raw = read_u32(data + 4 * i);
      float value;
      std::memcpy(&value, &raw, sizeof value);
      out.samples[static_cast<Eigen::Index>(i)] = value;
    }
  }
  else {
    throw Error("unsupported encoding (format " + std::to_string(format) + ", " +
                std::to_string(bits) +
                " bits); expected 16-bit PCM or 32-bit float" + where);
  }
  out.validate();
  return out;
}

std::size_t write_wav(const std::filesystem::path& path, const Signal& signal,
                      WavEncoding encoding)
{
  signal.validate();
  const bool pcm = encoding == WavEncoding::pcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto n = static_cast<std::uint32_t>(signal.size());
  const std::uint32_t data_size = n * block;

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm ? format_pcm : format_float);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  std::size_t clipped = 0;
  for (Eigen::Index i = 0; i < signal.size(); ++i) {
    const double x = signal.samples[i];
    if (pcm) {
      const double scaled = std::nearbyint(x * 32768.0);
      if (scaled < -32768.0 || scaled > 32767.0) ++clipped;
      put_u16(out, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(quantize_pcm16(x))));
    }
    else {
      const float value = static_cast<float>(x);
      std::uint32_t raw;
      std::memcpy(&raw, &value, sizeof raw);
      put_u32(out, raw);
    }
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write WAV file " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("write failed for " + path.string());
  if (clipped > 0)
    std::cerr << "warning: " << clipped << " samples clipped while writing "
              << path.string() << "\n";
  return clipped;
}

} // namespace bregpr
