#include "mixstyle/cloner/spectral_loss.hpp"

#include <cmath>

#include "mixstyle/audio/stft.hpp"

namespace mixstyle::cloner {

double mss_loss(std::span<const float> gt, std::span<const float> y,
                const SpectralLossConfig& config) {
  config.validate();
  require(gt.size() == y.size(), "mss_loss: length mismatch");

  double total = 0.0;
  for (int fft : config.fft_sizes) {
    const int hop = fft / 4;
    const auto s = audio::stft_magnitude(gt, fft, hop);
    const auto sh = audio::stft_magnitude(y, fft, hop);
    double l1 = 0.0, lg = 0.0;
    const size_t n = s.mag.size();
    for (size_t i = 0; i < n; ++i) {
      const double a = s.mag[i];
      const double b = sh.mag[i];
      l1 += std::fabs(a - b);
      const double d = std::log(a + config.log_eps) - std::log(b + config.log_eps);
      lg += d * d;
    }
    l1 /= static_cast<double>(n);
    lg /= static_cast<double>(n);
    total += (1.0 - config.alpha) * l1 + config.alpha * lg;
  }
  return total;
}

double full_loss(const AudioBuffer& gt, const AudioBuffer& y, const SpectralLossConfig& config) {
  gt.validate();
  y.validate();
  require(gt.length() == y.length(), "full_loss: length mismatch");

  std::vector<float> gm, gs, ym, ys;
  audio::to_mid_side(gt, gm, gs);
  audio::to_mid_side(y, ym, ys);

  double total = mss_loss(gt.left(), y.left(), config);
  total += mss_loss(gt.right(), y.right(), config);
  total += mss_loss(gm, ym, config);
  total += mss_loss(gs, ys, config);
  return total;
}

}  // namespace mixstyle::cloner
