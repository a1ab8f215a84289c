#include "mixstyle/fx/processors.hpp"

#include <cmath>
#include <complex>

#include "mixstyle/audio/fft.hpp"
#include "mixstyle/audio/wav.hpp"
#include "mixstyle/common/rng.hpp"

namespace mixstyle::fx {

namespace {

struct BiquadCoeffs {
  double b0, b1, b2, a1, a2;  // normalized, a0 = 1
};

BiquadCoeffs rbj_coeffs(const EqBand& band, double fs) {
  const double a = std::pow(10.0, band.gain_db / 40.0);
  const double w0 = 2.0 * M_PI * band.freq_hz / fs;
  const double cw = std::cos(w0);
  const double sw = std::sin(w0);
  const double alpha = sw / (2.0 * band.q);
  const double sq = 2.0 * std::sqrt(a) * alpha;

  double b0, b1, b2, a0, a1, a2;
  switch (band.type) {
    case EqBandType::kPeaking:
      b0 = 1.0 + alpha * a;
      b1 = -2.0 * cw;
      b2 = 1.0 - alpha * a;
      a0 = 1.0 + alpha / a;
      a1 = -2.0 * cw;
      a2 = 1.0 - alpha / a;
      break;
    case EqBandType::kLowShelf:
      b0 = a * ((a + 1.0) - (a - 1.0) * cw + sq);
      b1 = 2.0 * a * ((a - 1.0) - (a + 1.0) * cw);
      b2 = a * ((a + 1.0) - (a - 1.0) * cw - sq);
      a0 = (a + 1.0) + (a - 1.0) * cw + sq;
      a1 = -2.0 * ((a - 1.0) + (a + 1.0) * cw);
      a2 = (a + 1.0) + (a - 1.0) * cw - sq;
      break;
    case EqBandType::kHighShelf:
      b0 = a * ((a + 1.0) + (a - 1.0) * cw + sq);
      b1 = -2.0 * a * ((a - 1.0) + (a + 1.0) * cw);
      b2 = a * ((a + 1.0) + (a - 1.0) * cw - sq);
      a0 = (a + 1.0) - (a - 1.0) * cw + sq;
      a1 = 2.0 * ((a - 1.0) - (a + 1.0) * cw);
      a2 = (a + 1.0) - (a - 1.0) * cw - sq;
      break;
    default:
      throw Error("rbj_coeffs: bad band type");
  }
  return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

void biquad_inplace(std::vector<float>& x, const BiquadCoeffs& c) {
  double z1 = 0.0, z2 = 0.0;
  for (float& sf : x) {
    const double in = sf;
    const double out = c.b0 * in + z1;
    z1 = c.b1 * in - c.a1 * out + z2;
    z2 = c.b2 * in - c.a2 * out;
    sf = static_cast<float>(out);
  }
}

}  // namespace

double eq_band_magnitude(const EqBand& band, double freq_hz, double sample_rate) {
  const BiquadCoeffs c = rbj_coeffs(band, sample_rate);
  const double w = 2.0 * M_PI * freq_hz / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  const std::complex<double> num = c.b0 + c.b1 * z1 + c.b2 * z2;
  const std::complex<double> den = 1.0 + c.a1 * z1 + c.a2 * z2;
  return std::abs(num / den);
}

AudioBuffer apply_eq(const AudioBuffer& in, const EqParams& params) {
  params.validate();
  AudioBuffer out = in;
  for (const auto& band : params.bands) {
    const BiquadCoeffs c = rbj_coeffs(band, in.sample_rate);
    for (auto& chan : out.ch) biquad_inplace(chan, c);
  }
  audio::require_finite(out, "apply_eq");
  return out;
}

AudioBuffer apply_drc(const AudioBuffer& in, const DrcParams& params) {
  params.validate();
  in.validate();
  const double fs = in.sample_rate;
  const double att = std::exp(-1.0 / (fs * params.attack_ms * 1e-3));
  const double rel = std::exp(-1.0 / (fs * params.release_ms * 1e-3));
  const double t = params.threshold_db;
  const double w = params.knee_db;
  const double slope = 1.0 / params.ratio - 1.0;

  AudioBuffer out = in;
  const size_t n = in.length();
  double gain_db = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double level =
        std::max(std::fabs(static_cast<double>(in.left()[i])), std::fabs(static_cast<double>(in.right()[i])));
    const double x = 20.0 * std::log10(std::max(level, 1e-10));

    double target;
    if (w > 0.0 && std::fabs(x - t) <= 0.5 * w) {
      const double d = x - t + 0.5 * w;
      target = slope * d * d / (2.0 * w);
    } else if (x < t) {
      target = 0.0;
    } else {
      target = slope * (x - t);
    }

    const double coeff = target < gain_db ? att : rel;
    gain_db = coeff * gain_db + (1.0 - coeff) * target;

    const float g = static_cast<float>(std::pow(10.0, (gain_db + params.makeup_db) / 20.0));
    out.left()[i] = in.left()[i] * g;
    out.right()[i] = in.right()[i] * g;
  }
  audio::require_finite(out, "apply_drc");
  return out;
}

AudioBuffer apply_pan(const AudioBuffer& in, const PanParams& params) {
  params.validate();
  in.validate();
  const float gl = static_cast<float>(std::cos(params.angle) * std::sqrt(2.0));
  const float gr = static_cast<float>(std::sin(params.angle) * std::sqrt(2.0));
  AudioBuffer out(in.length(), in.sample_rate);
  for (size_t i = 0; i < in.length(); ++i) {
    const float m = 0.5f * (in.left()[i] + in.right()[i]);
    out.left()[i] = gl * m;
    out.right()[i] = gr * m;
  }
  return out;
}

AudioBuffer apply_imager(const AudioBuffer& in, const ImagerParams& params) {
  params.validate();
  in.validate();
  const float g = static_cast<float>(params.side_gain);
  AudioBuffer out(in.length(), in.sample_rate);
  for (size_t i = 0; i < in.length(); ++i) {
    const float mid = in.left()[i] + in.right()[i];
    const float side = (in.left()[i] - in.right()[i]) * g;
    out.left()[i] = 0.5f * (mid + side);
    out.right()[i] = 0.5f * (mid - side);
  }
  return out;
}

AudioBuffer synth_impulse_response(const ReverbParams& params, int sample_rate) {
  params.validate();
  const size_t pre = static_cast<size_t>(std::lround(params.pre_delay_ms * 1e-3 * sample_rate));
  const size_t decay_len = static_cast<size_t>(std::lround(params.rt60_s * sample_rate));
  AudioBuffer ir(pre + decay_len, sample_rate);
  Rng rng(params.ir_seed);
  for (int c = 0; c < 2; ++c) {
    double energy = 0.0;
    for (size_t i = 0; i < decay_len; ++i) {
      const double tt = static_cast<double>(i) / sample_rate;
      const double v = rng.uniform(-1.0, 1.0) * std::exp(-6.908 * tt / params.rt60_s);
      ir.ch[static_cast<size_t>(c)][pre + i] = static_cast<float>(v);
      energy += v * v;
    }
    // unit energy per channel keeps the wet level independent of rt60
    const float norm = energy > 0.0 ? static_cast<float>(1.0 / std::sqrt(energy)) : 1.0f;
    for (size_t i = 0; i < decay_len; ++i) ir.ch[static_cast<size_t>(c)][pre + i] *= norm;
  }
  return ir;
}

AudioBuffer apply_reverb(const AudioBuffer& in, const ReverbParams& params) {
  params.validate();
  in.validate();
  AudioBuffer ir;
  if (!params.ir_path.empty()) {
    ir = audio::read_wav(params.ir_path);
    require(ir.length() <= static_cast<size_t>(3 * in.sample_rate) + 1,
            "apply_reverb: IR longer than 3 s: " + params.ir_path);
  } else {
    ir = synth_impulse_response(params, in.sample_rate);
  }

  const float wet = static_cast<float>(params.wet);
  const float dry = 1.0f - wet;
  AudioBuffer out(in.length(), in.sample_rate);
  for (int c = 0; c < 2; ++c) {
    const auto conv = audio::fft_convolve(in.ch[static_cast<size_t>(c)], ir.ch[static_cast<size_t>(c)]);
    for (size_t i = 0; i < in.length(); ++i)
      out.ch[static_cast<size_t>(c)][i] = dry * in.ch[static_cast<size_t>(c)][i] + wet * conv[i];
  }
  audio::require_finite(out, "apply_reverb");
  return out;
}

AudioBuffer apply_loudness(const AudioBuffer& in, const LoudnessParams& params) {
  params.validate();
  return audio::apply_gain_db(in, params.gain_db);
}

AudioBuffer apply_chain(const AudioBuffer& in, const FxChainInstance& instance) {
  instance.validate();
  if (instance.empty()) return in;
  AudioBuffer out = in;
  for (FxKind k : instance.order) {
    if (!instance.applied[static_cast<int>(k)]) continue;
    switch (k) {
      case FxKind::kEq: out = apply_eq(out, instance.eq); break;
      case FxKind::kDrc: out = apply_drc(out, instance.drc); break;
      case FxKind::kPan: out = apply_pan(out, instance.pan); break;
      case FxKind::kImager: out = apply_imager(out, instance.imager); break;
      case FxKind::kReverb: out = apply_reverb(out, instance.reverb); break;
      case FxKind::kLoudness: out = apply_loudness(out, instance.loudness); break;
    }
  }
  audio::require_finite(out, "apply_chain");
  return out;
}

}  // namespace mixstyle::fx
