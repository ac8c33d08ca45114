#pragma once

#include <string>

#include "cass/waveform.hpp"

namespace cass {

// Reads a single-channel WAV file (PCM16, PCM32 or IEEE float32). Anything
// else, including multi-channel files, is a DataError naming the path.
Waveform read_wav_mono(const std::string& path);

// Writes 16-bit PCM mono. Samples are clipped to [-1, 1].
void write_wav_mono(const std::string& path, const Waveform& w);

} // namespace cass
