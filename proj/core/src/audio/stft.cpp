#include "mixstyle/audio/stft.hpp"

#include <cmath>

#include "mixstyle/audio/fft.hpp"

namespace mixstyle::audio {

std::vector<double> make_window(Window w, int n) {
  std::vector<double> win(static_cast<size_t>(n), 1.0);
  if (w == Window::kHann) {
    for (int i = 0; i < n; ++i)
      win[static_cast<size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  }
  return win;
}

// Reflection index for position p into a signal of length len, pad offset.
// Mirrors about the first/last sample without duplicating the edge.
static size_t reflect_index(long p, long len) {
  if (len == 1) return 0;
  const long period = 2 * (len - 1);
  long m = p % period;
  if (m < 0) m += period;
  if (m >= len) m = period - m;
  return static_cast<size_t>(m);
}

SpectrogramMag stft_magnitude(std::span<const float> signal, int fft_size, int hop,
                              Window window) {
  require(fft_size > 0 && is_power_of_two(static_cast<size_t>(fft_size)),
          "stft: fft_size must be a power of two");
  require(hop > 0 && hop <= fft_size, "stft: need 0 < hop <= fft_size");
  require(signal.size() >= 2, "stft: signal too short for reflection padding");

  const long len = static_cast<long>(signal.size());
  const int pad = fft_size / 2;
  const int frames = static_cast<int>(signal.size() / static_cast<size_t>(hop)) + 1;
  const int bins = fft_size / 2 + 1;
  const std::vector<double> win = make_window(window, fft_size);

  SpectrogramMag out;
  out.fft_size = fft_size;
  out.hop = hop;
  out.window = window;
  out.frames = frames;
  out.bins = bins;
  out.mag.resize(static_cast<size_t>(frames) * bins);

  std::vector<std::complex<double>> buf(static_cast<size_t>(fft_size));
  for (int f = 0; f < frames; ++f) {
    const long start = static_cast<long>(f) * hop - pad;
    for (int i = 0; i < fft_size; ++i) {
      const size_t src = reflect_index(start + i, len);
      buf[static_cast<size_t>(i)] = {static_cast<double>(signal[src]) * win[static_cast<size_t>(i)],
                                     0.0};
    }
    fft(buf, false);
    for (int b = 0; b < bins; ++b)
      out.mag[static_cast<size_t>(f) * bins + b] = static_cast<float>(std::abs(buf[static_cast<size_t>(b)]));
  }
  return out;
}

}  // namespace mixstyle::audio
