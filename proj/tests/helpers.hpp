#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "mixstyle/audio/audio_buffer.hpp"
#include "mixstyle/common/rng.hpp"

namespace testutil {

using mixstyle::Rng;
using mixstyle::audio::AudioBuffer;

inline AudioBuffer sine(double freq, double duration_s, double amplitude = 1.0,
                        int rate = mixstyle::audio::kSampleRate) {
  const size_t n = static_cast<size_t>(duration_s * rate);
  AudioBuffer b(n, rate);
  for (size_t i = 0; i < n; ++i) {
    const float v = static_cast<float>(amplitude * std::sin(2.0 * M_PI * freq * i / rate));
    b.left()[i] = v;
    b.right()[i] = v;
  }
  return b;
}

inline AudioBuffer noise(double duration_s, uint64_t seed, double amplitude = 0.5,
                         int rate = mixstyle::audio::kSampleRate) {
  const size_t n = static_cast<size_t>(duration_s * rate);
  AudioBuffer b(n, rate);
  Rng rng(seed);
  for (size_t i = 0; i < n; ++i) {
    b.left()[i] = static_cast<float>(amplitude * rng.uniform(-1.0, 1.0));
    b.right()[i] = static_cast<float>(amplitude * rng.uniform(-1.0, 1.0));
  }
  return b;
}

inline double max_abs_diff(const AudioBuffer& a, const AudioBuffer& b) {
  double m = 0.0;
  for (int c = 0; c < 2; ++c)
    for (size_t i = 0; i < a.length(); ++i)
      m = std::max(m, std::fabs(static_cast<double>(a.ch[static_cast<size_t>(c)][i]) -
                                b.ch[static_cast<size_t>(c)][i]));
  return m;
}

inline double rms_diff(const AudioBuffer& a, const AudioBuffer& b) {
  double acc = 0.0;
  for (int c = 0; c < 2; ++c)
    for (size_t i = 0; i < a.length(); ++i) {
      const double d = static_cast<double>(a.ch[static_cast<size_t>(c)][i]) - b.ch[static_cast<size_t>(c)][i];
      acc += d * d;
    }
  return std::sqrt(acc / (2.0 * static_cast<double>(a.length())));
}

// O(N^2) DFT magnitude oracle for one frame of windowed samples
inline std::vector<double> naive_dft_mag(const std::vector<double>& frame) {
  const size_t n = frame.size();
  std::vector<double> mags(n / 2 + 1);
  for (size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double a = 2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(n);
      re += frame[i] * std::cos(a);
      im -= frame[i] * std::sin(a);
    }
    mags[k] = std::sqrt(re * re + im * im);
  }
  return mags;
}

// O(N*M) time-domain convolution oracle
inline std::vector<double> naive_convolve(const std::vector<float>& a, const std::vector<float>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += static_cast<double>(a[i]) * b[j];
  return out;
}

}  // namespace testutil

#ifdef MIXSTYLE_TEST_NEEDS_CORPUS
#include "mixstyle/common/hash.hpp"
#include "mixstyle/data/dataset.hpp"
#include "mixstyle/data/toy_dataset.hpp"

namespace testutil {

// In-memory corpus of synthetic stems, no disk round trip.
inline mixstyle::data::CorpusView tiny_corpus(int songs, double duration_s, uint64_t seed,
                                              const std::vector<std::string>& instruments = {
                                                  "drums", "bass", "vocals", "other"}) {
  mixstyle::data::CorpusView view;
  for (int s = 0; s < songs; ++s) {
    mixstyle::data::SongAudio sa;
    sa.name = "song_" + std::to_string(s);
    for (const auto& inst : instruments) {
      auto b = mixstyle::data::synth_stem(inst, duration_s,
                                          mixstyle::mix_seed(seed, static_cast<uint64_t>(s),
                                                             mixstyle::fnv1a64(inst.data(), inst.size())));
      sa.nonsilent[inst] = mixstyle::data::index_silence(b);
      sa.stems[inst] = std::move(b);
    }
    view.songs.push_back(std::move(sa));
  }
  return view;
}

}  // namespace testutil
#endif
