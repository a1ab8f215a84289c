#pragma once

#include <span>
#include <vector>

#include "mixstyle/audio/audio_buffer.hpp"
#include "mixstyle/nn/ops.hpp"

namespace mixstyle::cloner {

using audio::AudioBuffer;

struct SpectralLossConfig {
  std::vector<int> fft_sizes = {4096, 2048, 1024, 512};
  double alpha = 0.1;
  double log_eps = 1e-7;
  // hop is fft_size / 4

  void validate() const {
    require(!fft_sizes.empty(), "SpectralLossConfig: need at least one FFT size");
    require(alpha >= 0.0 && alpha <= 1.0, "SpectralLossConfig: alpha out of [0, 1]");
    require(log_eps > 0.0, "SpectralLossConfig: log_eps must be positive");
  }
};

// Per FFT size i: L_i = (1-alpha) * mean|S_i - S^_i| + alpha * mean(ln(S_i+eps) - ln(S^_i+eps))^2,
// summed over sizes. Means keep the magnitude independent of segment length
// and FFT size. Evaluation path, double precision.
double mss_loss(std::span<const float> gt, std::span<const float> y,
                const SpectralLossConfig& config);

// Sum of mss_loss over left, right, mid = L+R, side = L-R.
double full_loss(const AudioBuffer& gt, const AudioBuffer& y, const SpectralLossConfig& config);

// Differentiable path over flat-signal Vars.
template <typename T>
nn::Var<T> mss_loss_var(nn::Tape<T>* tape, const nn::Var<T>& gt, const nn::Var<T>& y,
                        const SpectralLossConfig& config) {
  config.validate();
  require(gt->numel() == y->numel(), "mss_loss_var: length mismatch");
  nn::Var<T> total;
  for (int fft : config.fft_sizes) {
    const int hop = fft / 4;
    auto s = nn::stft_mag_op(tape, gt, fft, hop);
    auto sh = nn::stft_mag_op(tape, y, fft, hop);
    auto l1 = nn::mean_abs(tape, nn::sub(tape, s, sh));
    auto lg = nn::mean_sq(tape, nn::sub(tape, nn::log_shift(tape, s, static_cast<T>(config.log_eps)),
                                        nn::log_shift(tape, sh, static_cast<T>(config.log_eps))));
    auto li = nn::add(tape, nn::scale(tape, l1, static_cast<T>(1.0 - config.alpha)),
                      nn::scale(tape, lg, static_cast<T>(config.alpha)));
    total = total ? nn::add(tape, total, li) : li;
  }
  return total;
}

// gt, y as [2, L] Vars.
template <typename T>
nn::Var<T> full_loss_var(nn::Tape<T>* tape, const nn::Var<T>& gt, const nn::Var<T>& y,
                         const SpectralLossConfig& config) {
  require(gt->shape.size() == 2 && gt->shape[0] == 2 && gt->shape == y->shape,
          "full_loss_var: need matching [2, L] inputs");
  auto gl = nn::slice_channels(tape, gt, 0, 1);
  auto gr = nn::slice_channels(tape, gt, 1, 2);
  auto yl = nn::slice_channels(tape, y, 0, 1);
  auto yr = nn::slice_channels(tape, y, 1, 2);
  auto gm = nn::add(tape, gl, gr);
  auto gs = nn::sub(tape, gl, gr);
  auto ym = nn::add(tape, yl, yr);
  auto ys = nn::sub(tape, yl, yr);

  auto loss = mss_loss_var(tape, gl, yl, config);
  loss = nn::add(tape, loss, mss_loss_var(tape, gr, yr, config));
  loss = nn::add(tape, loss, mss_loss_var(tape, gm, ym, config));
  loss = nn::add(tape, loss, mss_loss_var(tape, gs, ys, config));
  return loss;
}

}  // namespace mixstyle::cloner
