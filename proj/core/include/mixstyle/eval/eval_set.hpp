#pragma once

#include <optional>

#include "mixstyle/data/dataset.hpp"
#include "mixstyle/eval/disentanglement.hpp"
#include "mixstyle/fx/chain.hpp"

namespace mixstyle::evalm {

// The four Table-style regimes: mixes or single stems, manipulated with the
// configured chain family or one effect at a time.
enum class EvalRegime { kMultitrackFullFx, kSingleStemFullFx, kMultitrackSingleFx, kSingleStemSingleFx };

const char* eval_regime_name(EvalRegime r);

struct EvalSet {
  std::vector<audio::AudioBuffer> samples;  // n_segments * n_configs
  FactorMatrix factors;                     // one axis per active FX
  std::vector<int> segment_ids;
  std::vector<fx::FxChainInstance> configs;
};

// Draws n_segments normalized multitrack segments from the test corpus and
// n_configs chain configurations. Each configuration holds one parameter
// set per active FX axis, drawn from per-axis pools arranged as independent
// permutations, so every factor column carries n_configs distinct values.
// Stems are manipulated individually, then mixed (multitrack regimes).
EvalSet build_eval_set(const data::CorpusView& test_set, const fx::FxChainConfig& fx_config,
                       int n_segments, int n_configs, double segment_s, EvalRegime regime,
                       std::optional<fx::FxKind> single_fx, uint64_t seed, int threads = 1);

}  // namespace mixstyle::evalm
