#include "mixstyle/data/toy_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "mixstyle/audio/wav.hpp"
#include "mixstyle/common/hash.hpp"
#include "mixstyle/common/rng.hpp"
#include "mixstyle/data/dataset.hpp"

namespace mixstyle::data {

namespace fs = std::filesystem;
using audio::AudioBuffer;
using audio::kSampleRate;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void add_noise_bed(AudioBuffer& b, Rng& rng, double level) {
  for (auto& ch : b.ch)
    for (auto& s : ch) s += static_cast<float>(rng.uniform(-level, level));
}

void peak_normalize(AudioBuffer& b, double peak) {
  const double p = audio::peak_abs(b);
  if (p <= 0.0) return;
  const float g = static_cast<float>(peak / p);
  for (auto& ch : b.ch)
    for (auto& s : ch) s *= g;
}

AudioBuffer synth_drums(size_t n, Rng rng) {
  AudioBuffer out(n, kSampleRate);
  const double step_s = rng.uniform(0.22, 0.4);
  const size_t step = static_cast<size_t>(step_s * kSampleRate);
  size_t pos = 0;
  int beat = 0;
  while (pos < n) {
    const bool kick = (beat % 2) == 0;
    const size_t burst = static_cast<size_t>((kick ? 0.12 : 0.07) * kSampleRate);
    const double decay = kick ? 28.0 : 55.0;
    double lp_l = 0.0, lp_r = 0.0;
    const double lp_coeff = kick ? 0.98 : 0.6;  // kicks are low-passed harder
    for (size_t i = 0; i < burst && pos + i < n; ++i) {
      const double env = std::exp(-decay * static_cast<double>(i) / kSampleRate);
      const double shared = rng.uniform(-1.0, 1.0);
      const double nl = shared + 0.2 * rng.uniform(-1.0, 1.0);
      const double nr = shared + 0.2 * rng.uniform(-1.0, 1.0);
      lp_l = lp_coeff * lp_l + (1.0 - lp_coeff) * nl;
      lp_r = lp_coeff * lp_r + (1.0 - lp_coeff) * nr;
      out.left()[pos + i] += static_cast<float>(env * (kick ? 6.0 * lp_l : nl));
      out.right()[pos + i] += static_cast<float>(env * (kick ? 6.0 * lp_r : nr));
    }
    pos += step;
    ++beat;
  }
  peak_normalize(out, 0.6);
  add_noise_bed(out, rng, 0.003);
  return out;
}

AudioBuffer synth_bass(size_t n, Rng rng) {
  static const double kScale[5] = {43.65, 49.0, 55.0, 65.41, 73.42};  // F1..D2-ish
  AudioBuffer out(n, kSampleRate);
  const size_t note_len = static_cast<size_t>(rng.uniform(0.4, 0.7) * kSampleRate);
  size_t pos = 0;
  double phase = 0.0, phase2 = 0.0;
  while (pos < n) {
    const double f = kScale[rng.randint(5)];
    for (size_t i = 0; i < note_len && pos + i < n; ++i) {
      const double t = static_cast<double>(i) / kSampleRate;
      const double env = std::min(1.0, t / 0.02) * std::exp(-2.2 * t);
      phase += kTwoPi * f / kSampleRate;
      phase2 += kTwoPi * 2.0 * f / kSampleRate;
      const double v = env * (std::sin(phase) + 0.35 * std::sin(phase2));
      // detuned airy overtone gives the stem some stereo width
      const double shimmer = 0.12 * env * std::sin(kTwoPi * 7.02 * f * t);
      const double shimmer_r = 0.12 * env * std::sin(kTwoPi * 7.02 * f * 1.004 * t + 0.7);
      out.left()[pos + i] += static_cast<float>(v + shimmer);
      out.right()[pos + i] += static_cast<float>(v + shimmer_r);
    }
    pos += note_len;
  }
  peak_normalize(out, 0.55);
  add_noise_bed(out, rng, 0.002);
  return out;
}

AudioBuffer synth_vocals(size_t n, Rng rng) {
  AudioBuffer out(n, kSampleRate);
  size_t pos = 0;
  while (pos < n) {
    const size_t syllable = static_cast<size_t>(rng.uniform(0.2, 0.45) * kSampleRate);
    const size_t gap = static_cast<size_t>(rng.uniform(0.05, 0.18) * kSampleRate);
    const double f0 = rng.uniform(180.0, 320.0);
    const double formant1 = rng.uniform(700.0, 1000.0);
    const double formant2 = rng.uniform(1700.0, 2400.0);
    for (size_t i = 0; i < syllable && pos + i < n; ++i) {
      const double t = static_cast<double>(i) / kSampleRate;
      const double vib = 1.0 + 0.02 * std::sin(kTwoPi * 5.3 * t);
      const double env = std::sin(M_PI * static_cast<double>(i) / syllable);
      const double v = env * (std::sin(kTwoPi * f0 * vib * t) + 0.45 * std::sin(kTwoPi * formant1 * t) +
                              0.2 * std::sin(kTwoPi * formant2 * t));
      // second formant spreads slightly across the image
      const double air = 0.15 * env * std::sin(kTwoPi * formant2 * 1.003 * t + 0.9);
      out.left()[pos + i] += static_cast<float>(v - 0.4 * air);
      out.right()[pos + i] += static_cast<float>(v + 0.4 * air);
    }
    pos += syllable + gap;
  }
  peak_normalize(out, 0.5);
  add_noise_bed(out, rng, 0.003);
  return out;
}

AudioBuffer synth_other(size_t n, Rng rng) {
  AudioBuffer out(n, kSampleRate);
  const size_t chord_len = static_cast<size_t>(rng.uniform(1.2, 2.2) * kSampleRate);
  size_t pos = 0;
  while (pos < n) {
    const double root = rng.uniform(180.0, 420.0);
    const double freqs[3] = {root, root * 1.26, root * 1.5};
    const double detune = 1.0 + rng.uniform(0.002, 0.004);
    for (size_t i = 0; i < chord_len && pos + i < n; ++i) {
      const double t = static_cast<double>(i) / kSampleRate;
      const double env = std::min(1.0, t / 0.3) * std::min(1.0, (static_cast<double>(chord_len - i) / kSampleRate) / 0.3);
      const double am = 0.8 + 0.2 * std::sin(kTwoPi * 0.7 * t);
      double l = 0.0, r = 0.0;
      for (double f : freqs) {
        l += std::sin(kTwoPi * f * t);
        r += std::sin(kTwoPi * f * detune * t + 0.31);
      }
      out.left()[pos + i] += static_cast<float>(env * am * l / 3.0);
      out.right()[pos + i] += static_cast<float>(env * am * r / 3.0);
    }
    pos += chord_len;
  }
  peak_normalize(out, 0.45);
  add_noise_bed(out, rng, 0.002);
  return out;
}

}  // namespace

AudioBuffer synth_stem(const std::string& instrument, double duration_s, uint64_t seed) {
  const size_t n = static_cast<size_t>(duration_s * kSampleRate);
  require(n > 0, "synth_stem: duration must be positive");
  Rng rng(seed);
  if (instrument == "drums") return synth_drums(n, rng);
  if (instrument == "bass") return synth_bass(n, rng);
  if (instrument == "vocals") return synth_vocals(n, rng);
  if (instrument == "other") return synth_other(n, rng);
  throw Error("synth_stem: unknown instrument " + instrument);
}

void synth_toy_dataset(int n_songs, double duration_s, uint64_t seed, const std::string& out_dir) {
  require(n_songs > 0, "synth_toy_dataset: n_songs must be positive");
  fs::create_directories(out_dir);
  for (int s = 0; s < n_songs; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "song_%03d", s);
    const fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir);
    for (const char* inst : kInstruments) {
      const uint64_t stem_seed = mix_seed(seed, static_cast<uint64_t>(s) * 16 + 1,
                                          fnv1a64(inst, std::strlen(inst)));
      AudioBuffer b = synth_stem(inst, duration_s, stem_seed);
      // generation-time contract: dense enough for segment sampling
      const auto idx = index_silence(b);
      require(idx.total_samples() >= static_cast<size_t>(0.8 * static_cast<double>(b.length())),
              std::string("synth_toy_dataset: stem below 80% non-silent coverage: ") + inst);
      audio::write_wav(b, (dir / (std::string(inst) + ".wav")).string(), audio::WavBitDepth::kFloat32);
    }
  }
}

}  // namespace mixstyle::data
