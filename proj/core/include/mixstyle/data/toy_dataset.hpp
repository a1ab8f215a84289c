#pragma once

#include <string>

#include "mixstyle/audio/audio_buffer.hpp"

namespace mixstyle::data {

// Deterministic 4-stem synthetic songs in MUSDB-style folders:
// drums = filtered noise-burst patterns, bass = low sine riffs,
// vocals = formant-like AM tones, other = detuned chord pads.
// Every stem keeps a low noise bed so silence indexing retains >= 80%.
void synth_toy_dataset(int n_songs, double duration_s, uint64_t seed, const std::string& out_dir);

// Single stems, exposed for tests that need raw material.
audio::AudioBuffer synth_stem(const std::string& instrument, double duration_s, uint64_t seed);

}  // namespace mixstyle::data
