#include <benchmark/benchmark.h>

#include "mixstyle/audio/loudness.hpp"
#include "mixstyle/audio/stft.hpp"
#include "mixstyle/common/rng.hpp"
#include "mixstyle/fx/processors.hpp"

using namespace mixstyle;

namespace {

audio::AudioBuffer noise_buffer(size_t n, uint64_t seed = 1) {
  audio::AudioBuffer b(n);
  Rng rng(seed);
  for (size_t i = 0; i < n; ++i) {
    b.left()[i] = static_cast<float>(0.4 * rng.uniform(-1.0, 1.0));
    b.right()[i] = static_cast<float>(0.4 * rng.uniform(-1.0, 1.0));
  }
  return b;
}

}  // namespace

static void BM_BiquadCascade(benchmark::State& state) {
  const auto b = noise_buffer(static_cast<size_t>(state.range(0)));
  fx::EqParams eq;
  eq.bands = {{fx::EqBandType::kLowShelf, 120.0, 3.0, 0.7},
              {fx::EqBandType::kPeaking, 900.0, -4.0, 1.2},
              {fx::EqBandType::kPeaking, 3200.0, 2.5, 0.9},
              {fx::EqBandType::kHighShelf, 9000.0, -2.0, 0.7}};
  for (auto _ : state) {
    auto out = fx::apply_eq(b, eq);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BiquadCascade)->Arg(44100)->Arg(441000);

static void BM_Compressor(benchmark::State& state) {
  const auto b = noise_buffer(static_cast<size_t>(state.range(0)));
  fx::DrcParams p;
  p.threshold_db = -18.0;
  p.ratio = 4.0;
  p.knee_db = 3.0;
  for (auto _ : state) {
    auto out = fx::apply_drc(b, p);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Compressor)->Arg(44100)->Arg(441000);

static void BM_ReverbConvolution(benchmark::State& state) {
  const auto b = noise_buffer(static_cast<size_t>(state.range(0)));
  fx::ReverbParams p;
  p.rt60_s = 1.0;
  p.wet = 0.3;
  p.ir_seed = 4;
  for (auto _ : state) {
    auto out = fx::apply_reverb(b, p);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReverbConvolution)->Arg(44100)->Arg(220500);

static void BM_StftMagnitude(benchmark::State& state) {
  const auto b = noise_buffer(220500);
  const int fft = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto s = audio::stft_magnitude(b.left(), fft, fft / 4);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StftMagnitude)->Arg(512)->Arg(2048)->Arg(4096);

static void BM_IntegratedLoudness(benchmark::State& state) {
  const auto b = noise_buffer(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    auto l = audio::integrated_loudness(b);
    benchmark::DoNotOptimize(l);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IntegratedLoudness)->Arg(441000);
