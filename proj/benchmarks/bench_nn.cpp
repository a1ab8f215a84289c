#include <benchmark/benchmark.h>

#include "mixstyle/cloner/spectral_loss.hpp"
#include "mixstyle/common/rng.hpp"
#include "mixstyle/encoder/contrastive.hpp"
#include "mixstyle/nn/ops.hpp"

using namespace mixstyle;

static void BM_Conv1dForward(benchmark::State& state) {
  const int64_t len = state.range(0);
  auto x = nn::make_var<float>({8, len});
  auto w = nn::make_var<float>({16, 8, 9}, true);
  auto b = nn::make_var<float>({16}, true);
  Rng rng(2);
  for (auto& v : x->v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  for (auto& v : w->v) v = static_cast<float>(rng.uniform(-0.3, 0.3));
  for (auto _ : state) {
    auto y = nn::conv1d<float>(nullptr, x, w, b, 2, 1, nn::PadMode::kSame);
    benchmark::DoNotOptimize(y);
  }
  state.SetItemsProcessed(state.iterations() * len * 8 * 16 * 9);
}
BENCHMARK(BM_Conv1dForward)->Arg(44100)->Arg(220500);

static void BM_Conv1dTrainStep(benchmark::State& state) {
  const int64_t len = state.range(0);
  auto x = nn::make_var<float>({4, len});
  auto w = nn::make_var<float>({8, 4, 9}, true);
  auto b = nn::make_var<float>({8}, true);
  Rng rng(3);
  for (auto& v : x->v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  for (auto& v : w->v) v = static_cast<float>(rng.uniform(-0.3, 0.3));
  for (auto _ : state) {
    w->zero_grad();
    b->zero_grad();
    nn::Tape<float> tape;
    auto y = nn::conv1d(&tape, x, w, b, 2, 1, nn::PadMode::kSame);
    auto loss = nn::mean_sq(&tape, y);
    tape.backward(loss);
    benchmark::DoNotOptimize(w->g.data());
  }
}
BENCHMARK(BM_Conv1dTrainStep)->Arg(44100);

static void BM_NtxentLoss(benchmark::State& state) {
  const int pairs = static_cast<int>(state.range(0));
  Rng rng(4);
  std::vector<enc::Embedding> embs(static_cast<size_t>(2 * pairs));
  for (auto& e : embs) {
    e.v.resize(2048);
    for (auto& v : e.v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  std::vector<int> partners;
  for (int j = 0; j < pairs; ++j) {
    partners.push_back(2 * j + 1);
    partners.push_back(2 * j);
  }
  for (auto _ : state) {
    const double loss = enc::ntxent_loss(embs, partners, 0.1, 360);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_NtxentLoss)->Arg(8)->Arg(64)->Arg(128);

static void BM_MultiScaleSpectralLoss(benchmark::State& state) {
  const size_t len = static_cast<size_t>(state.range(0));
  Rng rng(5);
  std::vector<float> a(len), b(len);
  for (auto& v : a) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  for (auto& v : b) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  cloner::SpectralLossConfig cfg;
  for (auto _ : state) {
    const double loss = cloner::mss_loss(a, b, cfg);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_MultiScaleSpectralLoss)->Arg(44100)->Arg(220500);
