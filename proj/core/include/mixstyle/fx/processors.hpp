#pragma once

#include "mixstyle/audio/audio_buffer.hpp"
#include "mixstyle/fx/fx_params.hpp"

namespace mixstyle::fx {

using audio::AudioBuffer;

// Cascade of RBJ-cookbook biquads, identical filters on both channels.
AudioBuffer apply_eq(const AudioBuffer& in, const EqParams& params);

// Feed-forward compressor. Stereo-linked peak detection in dB, one-pole
// attack/release smoothing of the gain, quadratic soft knee, static slope
// 1/ratio above threshold, makeup gain.
AudioBuffer apply_drc(const AudioBuffer& in, const DrcParams& params);

// Constant-power law on the mono sum m = (L+R)/2:
// L' = cos(angle) m sqrt(2), R' = sin(angle) m sqrt(2).
AudioBuffer apply_pan(const AudioBuffer& in, const PanParams& params);

// Mid/side decomposition, side scaled by side_gain, recomposed.
AudioBuffer apply_imager(const AudioBuffer& in, const ImagerParams& params);

// out = (1-wet) dry + wet (dry (*) IR), per channel, FFT convolution,
// truncated to input length.
AudioBuffer apply_reverb(const AudioBuffer& in, const ReverbParams& params);

AudioBuffer apply_loudness(const AudioBuffer& in, const LoudnessParams& params);

// Applies the masked effects in instance order.
AudioBuffer apply_chain(const AudioBuffer& in, const FxChainInstance& instance);

// Decaying-noise IR: white noise times exp(-6.908 t / rt60), independent
// channels, pre_delay leading zeros, each channel scaled to unit energy.
AudioBuffer synth_impulse_response(const ReverbParams& params, int sample_rate = audio::kSampleRate);

// Analytic |H| of one EQ band at a frequency; used for response checks.
double eq_band_magnitude(const EqBand& band, double freq_hz, double sample_rate = audio::kSampleRate);

}  // namespace mixstyle::fx
