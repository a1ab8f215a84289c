#pragma once

#include <cmath>
#include <limits>

#include "mixstyle/audio/audio_buffer.hpp"

namespace mixstyle::audio {

// Integrated, gated loudness per ITU-R BS.1770-4. value is LUFS; -inf is the
// sentinel for digital silence / fully gated input.
struct LoudnessLufs {
  double value = -std::numeric_limits<double>::infinity();
  bool silence() const { return !std::isfinite(value); }
};

// K-weighting (shelf + RLB high-pass), 400 ms blocks with 75% overlap,
// -70 LUFS absolute gate followed by -10 LU relative gate.
// Throws for input shorter than one 400 ms block.
LoudnessLufs integrated_loudness(const AudioBuffer& buffer);

}  // namespace mixstyle::audio
