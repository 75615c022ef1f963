#pragma once

#include "bregpr/stft.hpp"

#include <cstddef>
#include <filesystem>

namespace bregpr {

enum class WavEncoding
{
  pcm16,
  float32,
};

/// Reads a mono RIFF/WAVE file (16-bit PCM or 32-bit IEEE float).
/// PCM samples are scaled by 1/32768.
Signal load_wav(const std::filesystem::path& path);

/// Writes a mono RIFF/WAVE file. Returns the number of samples that had to be
/// clipped to the representable range (a warning is logged when nonzero).
std::size_t write_wav(const std::filesystem::path& path, const Signal& signal,
                      WavEncoding encoding = WavEncoding::pcm16);

/// The 16-bit code write_wav would store for `sample`.
int quantize_pcm16(double sample);

} // namespace bregpr
