#pragma once

#include <string>

#include "mixstyle/audio/audio_buffer.hpp"

namespace mixstyle::audio {

enum class WavBitDepth { kPcm16, kPcm24, kFloat32 };

// RIFF/WAVE reader. Accepts PCM 16/24-bit and 32-bit float, 1 or 2 channels.
// Mono is duplicated to stereo. Any sample rate other than 44100 is rejected;
// the pipeline never resamples.
AudioBuffer read_wav(const std::string& path);

void write_wav(const AudioBuffer& buffer, const std::string& path,
               WavBitDepth depth = WavBitDepth::kFloat32);

}  // namespace mixstyle::audio
