#include "mixstyle/audio/loudness.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace mixstyle::audio {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

// BS.1770 stage 1 shelf and stage 2 RLB high-pass, re-derived for an
// arbitrary rate from the analog prototypes (the standard tabulates 48 kHz
// only). Same parametrization reference loudness meters use.
Biquad shelf_for_rate(double fs) {
  const double f0 = 1681.974450955533;
  const double gain_db = 3.999843853973347;
  const double q = 0.7071752369554196;

  const double k = std::tan(M_PI * f0 / fs);
  const double vh = std::pow(10.0, gain_db / 20.0);
  const double vb = std::pow(vh, 0.4996667741545416);
  const double a0 = 1.0 + k / q + k * k;
  Biquad bq{};
  bq.b0 = (vh + vb * k / q + k * k) / a0;
  bq.b1 = 2.0 * (k * k - vh) / a0;
  bq.b2 = (vh - vb * k / q + k * k) / a0;
  bq.a1 = 2.0 * (k * k - 1.0) / a0;
  bq.a2 = (1.0 - k / q + k * k) / a0;
  return bq;
}

Biquad highpass_for_rate(double fs) {
  const double f0 = 38.13547087602444;
  const double q = 0.5003270373238773;

  const double k = std::tan(M_PI * f0 / fs);
  const double a0 = 1.0 + k / q + k * k;
  Biquad bq{};
  bq.b0 = 1.0;
  bq.b1 = -2.0;
  bq.b2 = 1.0;
  bq.a1 = 2.0 * (k * k - 1.0) / a0;
  bq.a2 = (1.0 - k / q + k * k) / a0;
  return bq;
}

void filter_inplace(std::vector<double>& x, const Biquad& c) {
  double z1 = 0.0, z2 = 0.0;  // direct form II transposed
  for (double& s : x) {
    const double in = s;
    const double out = c.b0 * in + z1;
    z1 = c.b1 * in - c.a1 * out + z2;
    z2 = c.b2 * in - c.a2 * out;
    s = out;
  }
}

}  // namespace

LoudnessLufs integrated_loudness(const AudioBuffer& buffer) {
  buffer.validate();
  const double fs = buffer.sample_rate;
  const size_t block = static_cast<size_t>(std::lround(0.400 * fs));
  const size_t hop = static_cast<size_t>(std::lround(0.100 * fs));
  require(buffer.length() >= block, "integrated_loudness: input shorter than 400 ms");

  const Biquad shelf = shelf_for_rate(fs);
  const Biquad hp = highpass_for_rate(fs);

  // per-channel K-weighted mean square per block
  const size_t n = buffer.length();
  const size_t nblocks = (n - block) / hop + 1;
  std::vector<double> z(nblocks, 0.0);

  std::vector<double> w(n);
  for (const auto& chan : buffer.ch) {
    for (size_t i = 0; i < n; ++i) w[i] = static_cast<double>(chan[i]);
    filter_inplace(w, shelf);
    filter_inplace(w, hp);
    // cumulative sum of squares for O(1) block energies
    std::vector<double> cum(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + w[i] * w[i];
    for (size_t j = 0; j < nblocks; ++j) {
      const size_t start = j * hop;
      z[j] += (cum[start + block] - cum[start]) / static_cast<double>(block);
    }
  }

  auto block_loudness = [](double zj) { return -0.691 + 10.0 * std::log10(zj); };

  // absolute gate at -70 LUFS
  double sum_abs = 0.0;
  size_t count_abs = 0;
  for (double zj : z) {
    if (zj > 0.0 && block_loudness(zj) > -70.0) {
      sum_abs += zj;
      ++count_abs;
    }
  }
  if (count_abs == 0) return LoudnessLufs{};

  // relative gate 10 LU below the abs-gated mean
  const double rel_threshold = block_loudness(sum_abs / static_cast<double>(count_abs)) - 10.0;
  double sum_rel = 0.0;
  size_t count_rel = 0;
  for (double zj : z) {
    if (zj > 0.0) {
      const double lj = block_loudness(zj);
      if (lj > -70.0 && lj > rel_threshold) {
        sum_rel += zj;
        ++count_rel;
      }
    }
  }
  if (count_rel == 0) return LoudnessLufs{};
  return LoudnessLufs{block_loudness(sum_rel / static_cast<double>(count_rel))};
}

}  // namespace mixstyle::audio
