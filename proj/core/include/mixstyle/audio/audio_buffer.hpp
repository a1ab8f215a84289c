#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mixstyle/common/error.hpp"

namespace mixstyle::audio {

inline constexpr int kSampleRate = 44100;

// Stereo, fixed-rate sampled audio. The universal signal carrier: every
// processor in the pipeline consumes and produces one of these.
struct AudioBuffer {
  int sample_rate = kSampleRate;
  std::array<std::vector<float>, 2> ch;  // left, right

  AudioBuffer() = default;
  AudioBuffer(size_t length, int rate = kSampleRate)
      : sample_rate(rate), ch{std::vector<float>(length, 0.0f), std::vector<float>(length, 0.0f)} {}

  size_t length() const { return ch[0].size(); }

  std::vector<float>& left() { return ch[0]; }
  std::vector<float>& right() { return ch[1]; }
  const std::vector<float>& left() const { return ch[0]; }
  const std::vector<float>& right() const { return ch[1]; }

  void validate() const {
    require(sample_rate > 0, "AudioBuffer: sample_rate must be positive");
    require(ch[0].size() == ch[1].size(), "AudioBuffer: channel lengths differ");
  }
};

// Paper convention, unscaled: mid = L + R, side = L - R.
void to_mid_side(const AudioBuffer& in, std::vector<float>& mid, std::vector<float>& side);

// Inverse carries the 1/2: L = (mid + side) / 2, R = (mid - side) / 2.
AudioBuffer from_mid_side(std::span<const float> mid, std::span<const float> side,
                          int sample_rate = kSampleRate);

AudioBuffer apply_gain_db(const AudioBuffer& in, double gain_db);

// Per-frame RMS over both channels. Full frames only; a buffer shorter than
// one frame yields a single frame over what is there.
std::vector<float> rms_energy(const AudioBuffer& in, size_t frame, size_t hop);

double rms_all(const AudioBuffer& in);
double rms_mono(std::span<const float> x);
double peak_abs(const AudioBuffer& in);

bool all_finite(const AudioBuffer& in);
void require_finite(const AudioBuffer& in, const char* what);

double db_from_linear(double a);
double linear_from_db(double db);

}  // namespace mixstyle::audio
