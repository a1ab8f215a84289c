#include "mixstyle/normalize/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mixstyle/audio/fft.hpp"
#include "mixstyle/audio/loudness.hpp"

namespace mixstyle::fxnorm {

namespace {

constexpr double kEqClampDb = 12.0;
constexpr double kCrestToleranceDb = 0.3;
constexpr double kCrestSkipDb = 0.2;

std::vector<float> design_matching_fir(const std::vector<float>& correction_db, int fft_size) {
  const int bins = fft_size / 2 + 1;
  std::vector<std::complex<double>> spec(static_cast<size_t>(fft_size), {0.0, 0.0});
  for (int b = 0; b < bins; ++b) {
    const double mag = std::pow(10.0, correction_db[static_cast<size_t>(b)] / 20.0);
    spec[static_cast<size_t>(b)] = {mag, 0.0};
    if (b > 0 && b < fft_size / 2) spec[static_cast<size_t>(fft_size - b)] = {mag, 0.0};
  }
  audio::fft(spec, true);
  const double inv_n = 1.0 / fft_size;

  // zero-phase kernel rotated to linear phase, Hann-tapered
  std::vector<float> fir(static_cast<size_t>(fft_size));
  const int half = fft_size / 2;
  for (int n = 0; n < fft_size; ++n) {
    const int src = (n + half) % fft_size;
    const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / fft_size));
    fir[static_cast<size_t>(n)] = static_cast<float>(spec[static_cast<size_t>(src)].real() * inv_n * w);
  }
  return fir;
}

}  // namespace

AudioBuffer normalize_eq(const AudioBuffer& buffer, const InstrumentFeatures& features,
                         const AnalysisSettings& settings) {
  buffer.validate();
  std::vector<float> current_db;
  if (!average_spectrum_db(buffer, settings, current_db)) return buffer;  // silent

  const int bins = settings.fft_size / 2 + 1;
  require(static_cast<int>(features.avg_spectrum_db.size()) == bins,
          "normalize_eq: stats fft size differs from analysis settings");

  std::vector<float> correction(static_cast<size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    const double c = features.avg_spectrum_db[static_cast<size_t>(b)] - current_db[static_cast<size_t>(b)];
    correction[static_cast<size_t>(b)] = static_cast<float>(std::clamp(c, -kEqClampDb, kEqClampDb));
  }

  const std::vector<float> fir = design_matching_fir(correction, settings.fft_size);
  const int delay = settings.fft_size / 2;

  AudioBuffer out(buffer.length(), buffer.sample_rate);
  for (int c = 0; c < 2; ++c) {
    const auto conv = audio::fft_convolve(buffer.ch[static_cast<size_t>(c)], fir);
    for (size_t i = 0; i < buffer.length(); ++i)
      out.ch[static_cast<size_t>(c)][i] = conv[i + static_cast<size_t>(delay)];
  }
  audio::require_finite(out, "normalize_eq");
  return out;
}

namespace {

// Memoryless dB-domain compander on the stereo-linked instantaneous level.
// Exponent beta scales the level distribution about the RMS: beta < 1
// compresses (crest down), beta > 1 expands (crest up). A smoothed envelope
// cannot do this for stationary or hard-gated material, where it degenerates
// to a uniform gain over the active region.
AudioBuffer compand_levels(const AudioBuffer& in, double beta) {
  const double m_db = 20.0 * std::log10(std::max(audio::rms_all(in), 1e-12));

  AudioBuffer out(in.length(), in.sample_rate);
  for (size_t i = 0; i < in.length(); ++i) {
    const double lvl =
        std::max(std::fabs(static_cast<double>(in.left()[i])), std::fabs(static_cast<double>(in.right()[i])));
    float g = 1.0f;
    if (lvl > 1e-9) {
      const double gain_db =
          std::clamp((beta - 1.0) * (20.0 * std::log10(lvl) - m_db), -24.0, 24.0);
      g = static_cast<float>(std::pow(10.0, gain_db / 20.0));
    }
    out.left()[i] = in.left()[i] * g;
    out.right()[i] = in.right()[i] * g;
  }
  return out;
}

}  // namespace

AudioBuffer normalize_drc(const AudioBuffer& buffer, const InstrumentFeatures& features) {
  buffer.validate();
  if (audio::rms_all(buffer) <= 0.0) return buffer;

  const double target = features.avg_crest_db;
  const double c0 = crest_factor_db(buffer);
  if (std::fabs(c0 - target) <= kCrestSkipDb) return buffer;

  // secant iteration on the companding exponent
  double beta_prev = 1.0, crest_prev = c0;
  double beta = std::clamp(target / std::max(c0, 0.5), 0.2, 5.0);
  AudioBuffer candidate = buffer;
  for (int iter = 0; iter < 12; ++iter) {
    candidate = compand_levels(buffer, beta);
    const double crest = crest_factor_db(candidate);
    if (std::fabs(crest - target) <= kCrestToleranceDb) break;
    const double denom = crest - crest_prev;
    double next;
    if (std::fabs(denom) < 1e-6) {
      next = beta * std::clamp(target / std::max(crest, 0.5), 0.5, 2.0);
    } else {
      next = beta + (target - crest) * (beta - beta_prev) / denom;
    }
    beta_prev = beta;
    crest_prev = crest;
    beta = std::clamp(next, 0.05, 8.0);
  }
  audio::require_finite(candidate, "normalize_drc");
  return candidate;
}

AudioBuffer normalize_imaging(const AudioBuffer& buffer, const InstrumentFeatures& features) {
  buffer.validate();
  std::vector<float> mid, side;
  audio::to_mid_side(buffer, mid, side);
  const double m = audio::rms_mono(mid);
  const double s = audio::rms_mono(side);
  if (s <= 0.0 || m <= 0.0) return buffer;  // mono or degenerate

  const double scale = features.avg_side_ratio / (s / m);
  for (auto& v : side) v = static_cast<float>(v * scale);
  return audio::from_mid_side(mid, side, buffer.sample_rate);
}

AudioBuffer normalize_panning(const AudioBuffer& buffer, const InstrumentFeatures& features) {
  buffer.validate();
  const double l = audio::rms_mono(buffer.left());
  const double r = audio::rms_mono(buffer.right());
  if (l + r <= 0.0) return buffer;  // silence

  const double b = features.avg_lr_balance;
  const double s = std::sqrt((l * l + r * r) / (b * b + (1.0 - b) * (1.0 - b)));
  const double lt = b * s;        // target left RMS
  const double rt = (1.0 - b) * s;

  AudioBuffer out(buffer.length(), buffer.sample_rate);
  const double eps = 1e-7 * (l + r);
  if (l > eps && r > eps) {
    const float gl = static_cast<float>(lt / l);
    const float gr = static_cast<float>(rt / r);
    for (size_t i = 0; i < buffer.length(); ++i) {
      out.left()[i] = buffer.left()[i] * gl;
      out.right()[i] = buffer.right()[i] * gr;
    }
  } else {
    // one channel is silent: rebuild both from the mono sum
    std::vector<float> mono(buffer.length());
    for (size_t i = 0; i < buffer.length(); ++i) mono[i] = buffer.left()[i] + buffer.right()[i];
    const double mono_rms = audio::rms_mono(mono);
    const float gl = static_cast<float>(lt / mono_rms);
    const float gr = static_cast<float>(rt / mono_rms);
    for (size_t i = 0; i < buffer.length(); ++i) {
      out.left()[i] = mono[i] * gl;
      out.right()[i] = mono[i] * gr;
    }
  }
  return out;
}

AudioBuffer normalize_loudness(const AudioBuffer& buffer, double target_lufs) {
  buffer.validate();
  const auto first = audio::integrated_loudness(buffer);
  if (first.silence()) return buffer;
  AudioBuffer out = audio::apply_gain_db(buffer, target_lufs - first.value);
  const auto second = audio::integrated_loudness(out);
  if (!second.silence()) out = audio::apply_gain_db(out, target_lufs - second.value);
  return out;
}

AudioBuffer fx_normalize(const AudioBuffer& buffer, const std::string& instrument,
                         const NormalizationStats& stats, double target_lufs) {
  const InstrumentFeatures& f = stats.require_instrument(instrument);
  AudioBuffer out = normalize_eq(buffer, f, stats.settings);
  out = normalize_drc(out, f);
  out = normalize_imaging(out, f);
  out = normalize_panning(out, f);
  out = normalize_loudness(out, target_lufs);
  audio::require_finite(out, "fx_normalize");
  return out;
}

const std::array<const char*, 5>& fx_normalize_stages() {
  static const std::array<const char*, 5> stages = {"eq", "drc", "imaging", "panning", "loudness"};
  return stages;
}

}  // namespace mixstyle::fxnorm
