#include "mixstyle/audio/audio_buffer.hpp"

#include <cmath>

namespace mixstyle::audio {

void to_mid_side(const AudioBuffer& in, std::vector<float>& mid, std::vector<float>& side) {
  in.validate();
  const size_t n = in.length();
  mid.resize(n);
  side.resize(n);
  const auto& l = in.left();
  const auto& r = in.right();
  for (size_t i = 0; i < n; ++i) {
    mid[i] = l[i] + r[i];
    side[i] = l[i] - r[i];
  }
}

AudioBuffer from_mid_side(std::span<const float> mid, std::span<const float> side,
                          int sample_rate) {
  require(mid.size() == side.size(), "from_mid_side: length mismatch");
  AudioBuffer out(mid.size(), sample_rate);
  for (size_t i = 0; i < mid.size(); ++i) {
    out.left()[i] = 0.5f * (mid[i] + side[i]);
    out.right()[i] = 0.5f * (mid[i] - side[i]);
  }
  return out;
}

AudioBuffer apply_gain_db(const AudioBuffer& in, double gain_db) {
  require(std::isfinite(gain_db), "apply_gain_db: gain must be finite");
  const float g = static_cast<float>(linear_from_db(gain_db));
  AudioBuffer out = in;
  for (auto& c : out.ch)
    for (auto& s : c) s *= g;
  return out;
}

std::vector<float> rms_energy(const AudioBuffer& in, size_t frame, size_t hop) {
  require(frame > 0, "rms_energy: frame must be positive");
  if (hop == 0) hop = frame;
  in.validate();
  const size_t n = in.length();
  std::vector<float> out;
  if (n == 0) return out;

  auto frame_rms = [&](size_t start, size_t len) {
    double acc = 0.0;
    for (size_t i = start; i < start + len; ++i) {
      acc += static_cast<double>(in.left()[i]) * in.left()[i];
      acc += static_cast<double>(in.right()[i]) * in.right()[i];
    }
    return static_cast<float>(std::sqrt(acc / (2.0 * static_cast<double>(len))));
  };

  if (n < frame) {
    out.push_back(frame_rms(0, n));
    return out;
  }
  for (size_t start = 0; start + frame <= n; start += hop) out.push_back(frame_rms(start, frame));
  return out;
}

double rms_all(const AudioBuffer& in) {
  const size_t n = in.length();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (const auto& c : in.ch)
    for (float s : c) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / (2.0 * static_cast<double>(n)));
}

double rms_mono(std::span<const float> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float s : x) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double peak_abs(const AudioBuffer& in) {
  double p = 0.0;
  for (const auto& c : in.ch)
    for (float s : c) p = std::max(p, std::fabs(static_cast<double>(s)));
  return p;
}

bool all_finite(const AudioBuffer& in) {
  for (const auto& c : in.ch)
    for (float s : c)
      if (!std::isfinite(s)) return false;
  return true;
}

void require_finite(const AudioBuffer& in, const char* what) {
  require(all_finite(in), std::string(what) + ": non-finite sample produced");
}

double db_from_linear(double a) { return 20.0 * std::log10(a); }
double linear_from_db(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace mixstyle::audio
