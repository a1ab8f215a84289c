#include "mixstyle/eval/eval_set.hpp"

#include <algorithm>

#include "mixstyle/common/parallel.hpp"
#include "mixstyle/fx/processors.hpp"

namespace mixstyle::evalm {

const char* eval_regime_name(EvalRegime r) {
  switch (r) {
    case EvalRegime::kMultitrackFullFx: return "multitrack_full_fx";
    case EvalRegime::kSingleStemFullFx: return "single_stem_full_fx";
    case EvalRegime::kMultitrackSingleFx: return "multitrack_single_fx";
    case EvalRegime::kSingleStemSingleFx: return "single_stem_single_fx";
  }
  throw Error("eval_regime_name: bad regime");
}

EvalSet build_eval_set(const data::CorpusView& test_set, const fx::FxChainConfig& fx_config,
                       int n_segments, int n_configs, double segment_s, EvalRegime regime,
                       std::optional<fx::FxKind> single_fx, uint64_t seed, int threads) {
  require(n_segments >= 2 && n_configs >= 2, "build_eval_set: need >= 2 segments and configs");
  require(!test_set.songs.empty(), "build_eval_set: empty test corpus");
  fx_config.validate();

  const bool single_fx_regime =
      regime == EvalRegime::kMultitrackSingleFx || regime == EvalRegime::kSingleStemSingleFx;
  const bool single_stem =
      regime == EvalRegime::kSingleStemFullFx || regime == EvalRegime::kSingleStemSingleFx;
  require(!single_fx_regime || single_fx.has_value(),
          "build_eval_set: single-FX regime needs an effect");

  // active FX axes
  std::vector<fx::FxKind> axes;
  if (single_fx_regime) {
    axes.push_back(*single_fx);
  } else {
    for (int f = 0; f < fx::kNumFx; ++f)
      if (fx_config.probabilities[static_cast<size_t>(f)] > 0.0)
        axes.push_back(static_cast<fx::FxKind>(f));
  }
  require(!axes.empty(), "build_eval_set: no active FX axes in the configuration");

  Rng rng(seed);

  // One parameter pool per axis. With a single axis the pool matches the
  // config count and ids form a permutation. With several axes each pool is
  // smaller than the config count and ids repeat in a balanced multiset,
  // shuffled per axis: if every column were a bijection of the config index
  // the axes would induce identical sample partitions and every mutual-
  // information gap would cancel.
  const int pool_size = axes.size() == 1 ? n_configs : std::max(2, n_configs / 2);
  std::vector<std::vector<fx::FxChainInstance>> pools(axes.size());
  for (size_t a = 0; a < axes.size(); ++a) {
    fx::FxChainConfig only = fx_config;
    only.probabilities.fill(0.0);
    only.probabilities[static_cast<size_t>(axes[a])] = 1.0;
    for (int c = 0; c < pool_size; ++c) pools[a].push_back(fx::sample_chain(only, rng));
  }

  std::vector<std::vector<int>> perms(axes.size());
  for (auto& perm : perms) {
    perm.resize(static_cast<size_t>(n_configs));
    for (int c = 0; c < n_configs; ++c) perm[static_cast<size_t>(c)] = c % pool_size;
    for (size_t i = perm.size() - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<size_t>(rng.randint(static_cast<int64_t>(i + 1)))]);
  }

  // compose one chain instance per configuration
  std::vector<fx::FxChainInstance> configs(static_cast<size_t>(n_configs));
  for (int c = 0; c < n_configs; ++c) {
    fx::FxChainInstance inst;  // canonical order: eval keeps factors identifiable
    for (size_t a = 0; a < axes.size(); ++a) {
      const auto& src = pools[a][static_cast<size_t>(perms[a][static_cast<size_t>(c)])];
      const int k = static_cast<int>(axes[a]);
      inst.applied[k] = true;
      switch (axes[a]) {
        case fx::FxKind::kEq: inst.eq = src.eq; break;
        case fx::FxKind::kDrc: inst.drc = src.drc; break;
        case fx::FxKind::kPan: inst.pan = src.pan; break;
        case fx::FxKind::kImager: inst.imager = src.imager; break;
        case fx::FxKind::kReverb: inst.reverb = src.reverb; break;
        case fx::FxKind::kLoudness: inst.loudness = src.loudness; break;
      }
    }
    inst.validate();
    configs[static_cast<size_t>(c)] = std::move(inst);
  }

  // normalized test segments; multitrack draws need every stem non-silent
  const auto instruments = test_set.instruments();
  const size_t need = static_cast<size_t>(segment_s * audio::kSampleRate);
  struct Segment {
    int song;
    size_t start;
    std::vector<std::string> stems;
  };
  std::vector<Segment> segments;
  for (int s = 0; s < n_segments; ++s) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      Segment seg;
      seg.song = static_cast<int>(rng.randint(static_cast<int64_t>(test_set.songs.size())));
      if (single_stem) {
        seg.stems = {instruments[static_cast<size_t>(rng.randint(static_cast<int64_t>(instruments.size())))]};
      } else {
        seg.stems = instruments;
      }
      data::SegmentIndex idx;
      bool first = true;
      for (const auto& inst : seg.stems) {
        const auto& si = test_set.songs[static_cast<size_t>(seg.song)].nonsilent.at(inst);
        idx = first ? si : data::intersect(idx, si);
        first = false;
      }
      const auto start = data::sample_segment_start(idx, need, rng);
      if (!start) continue;
      seg.start = *start;
      segments.push_back(std::move(seg));
      placed = true;
    }
    require(placed, "build_eval_set: insufficient test data for segment sampling");
  }

  EvalSet out;
  out.configs = configs;
  out.samples.resize(static_cast<size_t>(n_segments) * n_configs);
  out.segment_ids.resize(out.samples.size());
  out.factors.n = n_segments * n_configs;
  out.factors.k = static_cast<int>(axes.size());
  out.factors.values.resize(static_cast<size_t>(out.factors.n) * out.factors.k);
  out.factors.cardinality.assign(static_cast<size_t>(out.factors.k), pool_size);

  parallel_for(static_cast<int64_t>(out.samples.size()), threads, [&](int64_t i) {
    const int s = static_cast<int>(i) / n_configs;
    const int c = static_cast<int>(i) % n_configs;
    const Segment& seg = segments[static_cast<size_t>(s)];
    const auto& song = test_set.songs[static_cast<size_t>(seg.song)];

    audio::AudioBuffer mix(need, audio::kSampleRate);
    for (const auto& inst : seg.stems) {
      const auto part = data::cut_segment(song.stems.at(inst), seg.start, need);
      const auto wet = fx::apply_chain(part, configs[static_cast<size_t>(c)]);
      for (int ch = 0; ch < 2; ++ch)
        for (size_t j = 0; j < need; ++j)
          mix.ch[static_cast<size_t>(ch)][j] += wet.ch[static_cast<size_t>(ch)][j];
    }
    out.samples[static_cast<size_t>(i)] = std::move(mix);
    out.segment_ids[static_cast<size_t>(i)] = s;
    for (size_t a = 0; a < axes.size(); ++a)
      out.factors.values[static_cast<size_t>(i) * out.factors.k + static_cast<int>(a)] =
          perms[a][static_cast<size_t>(c)];
  });

  out.factors.validate();
  return out;
}

}  // namespace mixstyle::evalm
