#pragma once

#include <span>
#include <vector>

#include "mixstyle/common/error.hpp"

namespace mixstyle::audio {

enum class Window { kHann, kRect };

struct SpectrogramMag {
  int fft_size = 0;
  int hop = 0;
  Window window = Window::kHann;
  int frames = 0;
  int bins = 0;                // fft_size / 2 + 1
  std::vector<float> mag;      // frames x bins, row-major, all >= 0

  float at(int frame, int bin) const { return mag[static_cast<size_t>(frame) * bins + bin]; }
};

// Periodic Hann, w[n] = 0.5 (1 - cos(2 pi n / N)).
std::vector<double> make_window(Window w, int n);

// Centered frames with reflection padding of fft_size/2 on both ends;
// frame count = floor(len / hop) + 1.
SpectrogramMag stft_magnitude(std::span<const float> signal, int fft_size, int hop,
                              Window window = Window::kHann);

}  // namespace mixstyle::audio
