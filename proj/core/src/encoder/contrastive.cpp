#include "mixstyle/encoder/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mixstyle/common/parallel.hpp"
#include "mixstyle/fx/processors.hpp"

namespace mixstyle::enc {

void BatchPlan::audit() const {
  const int n = static_cast<int>(chains.size());
  require(n >= 2, "BatchPlan: need at least 2 pairs");
  require(static_cast<int>(contents.size()) == n, "BatchPlan: content count mismatch");
  require(static_cast<int>(items.size()) == 2 * n, "BatchPlan: item count mismatch");
  require(static_cast<int>(partners.size()) == 2 * n, "BatchPlan: partner count mismatch");
  require(!stem_types.empty(), "BatchPlan: empty stem-type set");

  std::vector<int> content_uses(static_cast<size_t>(n), 0);
  std::vector<std::set<int>> content_chains(static_cast<size_t>(n));
  for (int i = 0; i < 2 * n; ++i) {
    const auto& it = items[static_cast<size_t>(i)];
    require(it.content >= 0 && it.content < n && it.chain >= 0 && it.chain < n,
            "BatchPlan: item index out of range");
    // pairing is a perfect matching
    const int p = partners[static_cast<size_t>(i)];
    require(p >= 0 && p < 2 * n && p != i, "BatchPlan: bad partner");
    require(partners[static_cast<size_t>(p)] == i, "BatchPlan: partner map is not an involution");
    // positives share a chain but differ in content
    require(items[static_cast<size_t>(p)].chain == it.chain,
            "BatchPlan: positive pair with different chains");
    require(items[static_cast<size_t>(p)].content != it.content,
            "BatchPlan: positive pair with identical content");
    content_uses[static_cast<size_t>(it.content)]++;
    content_chains[static_cast<size_t>(it.content)].insert(it.chain);
  }
  for (int c = 0; c < n; ++c) {
    require(content_uses[static_cast<size_t>(c)] == 2,
            "BatchPlan: content must appear exactly twice");
    require(content_chains[static_cast<size_t>(c)].size() == 2,
            "BatchPlan: content must appear under two different chains");
  }
}

BatchPlan plan_contrastive_batch(const data::CorpusView& corpus, const fx::FxChainConfig& fx_config,
                                 const std::array<double, fx::kNumFx>& probabilities, int n_pairs,
                                 int n_stem_types, double seg_min_s, double seg_max_s, Rng& rng,
                                 CombinationMode mode) {
  require(n_pairs >= 2, "plan_contrastive_batch: need at least 2 pairs");
  require(!corpus.songs.empty(), "plan_contrastive_batch: empty corpus");
  require(corpus.songs.size() >= 2, "plan_contrastive_batch: need at least 2 songs");

  const auto instruments = corpus.instruments();
  require(n_stem_types >= 1 && n_stem_types <= static_cast<int>(instruments.size()),
          "plan_contrastive_batch: bad stem-type count");

  BatchPlan plan;

  // stem-type set shared by the whole batch
  std::vector<std::string> pool = instruments;
  int want = n_stem_types;
  if (mode == CombinationMode::kRandomCombination)
    want = 1 + static_cast<int>(rng.randint(static_cast<int64_t>(instruments.size())));
  for (int k = 0; k < want; ++k) {
    const auto pick = static_cast<size_t>(rng.randint(static_cast<int64_t>(pool.size())));
    plan.stem_types.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  std::sort(plan.stem_types.begin(), plan.stem_types.end());

  fx::FxChainConfig cfg = fx_config;
  cfg.probabilities = probabilities;
  for (int j = 0; j < n_pairs; ++j) plan.chains.push_back(fx::sample_chain(cfg, rng));

  // contents: ring neighbors must come from different songs so a positive
  // pair never shares content
  const double fs = audio::kSampleRate;
  for (int j = 0; j < n_pairs; ++j) {
    const int prev_song = j > 0 ? plan.contents.back().song : -1;
    const int first_song = !plan.contents.empty() ? plan.contents.front().song : -1;
    ContentRef ref;
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      ref.song = static_cast<int>(rng.randint(static_cast<int64_t>(corpus.songs.size())));
      if (ref.song == prev_song) continue;
      if (j == n_pairs - 1 && ref.song == first_song) continue;
      const double dur = rng.uniform(seg_min_s, seg_max_s);
      ref.length = static_cast<size_t>(dur * fs);

      data::SegmentIndex idx;
      bool first = true;
      for (const auto& inst : plan.stem_types) {
        const auto& si = corpus.songs[static_cast<size_t>(ref.song)].nonsilent.at(inst);
        idx = first ? si : data::intersect(idx, si);
        first = false;
      }
      const auto start = data::sample_segment_start(idx, ref.length, rng);
      if (!start) continue;
      ref.start = *start;
      placed = true;
    }
    require(placed, "plan_contrastive_batch: insufficient contents for segment sampling");
    plan.contents.push_back(ref);
  }

  // instance j applied to contents j and j+1 (mod N)
  for (int j = 0; j < n_pairs; ++j) {
    plan.items.push_back({j, j});
    plan.items.push_back({(j + 1) % n_pairs, j});
    plan.partners.push_back(2 * j + 1);
    plan.partners.push_back(2 * j);
  }

  plan.audit();
  return plan;
}

audio::AudioBuffer render_batch_item(const data::CorpusView& corpus, const BatchPlan& plan,
                                     int item) {
  const auto& it = plan.items.at(static_cast<size_t>(item));
  const ContentRef& c = plan.contents[static_cast<size_t>(it.content)];
  const fx::FxChainInstance& chain = plan.chains[static_cast<size_t>(it.chain)];

  audio::AudioBuffer mix(c.length, audio::kSampleRate);
  for (const auto& inst : plan.stem_types) {
    const auto& stem = corpus.songs[static_cast<size_t>(c.song)].stems.at(inst);
    const auto seg = data::cut_segment(stem, c.start, c.length);
    const auto wet = fx::apply_chain(seg, chain);
    for (int ch = 0; ch < 2; ++ch)
      for (size_t i = 0; i < mix.length(); ++i)
        mix.ch[static_cast<size_t>(ch)][i] += wet.ch[static_cast<size_t>(ch)][i];
  }
  return mix;
}

std::vector<audio::AudioBuffer> render_batch(const data::CorpusView& corpus, const BatchPlan& plan,
                                             int threads) {
  std::vector<audio::AudioBuffer> out(plan.items.size());
  parallel_for(static_cast<int64_t>(plan.items.size()), threads,
               [&](int64_t i) { out[static_cast<size_t>(i)] = render_batch_item(corpus, plan, static_cast<int>(i)); });
  return out;
}

double ntxent_loss(const std::vector<Embedding>& embeddings, const std::vector<int>& partners,
                   double tau, int d0) {
  const int n = static_cast<int>(embeddings.size());
  require(n >= 4, "ntxent_loss: need 2N >= 4");
  require(static_cast<int>(partners.size()) == n, "ntxent_loss: partner map size mismatch");
  require(tau > 0.0, "ntxent_loss: tau must be positive");

  // unit-norm subvectors
  std::vector<std::vector<double>> u(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    require(static_cast<int>(embeddings[static_cast<size_t>(i)].v.size()) >= d0,
            "ntxent_loss: embedding shorter than d0");
    double norm = 0.0;
    for (int j = 0; j < d0; ++j) {
      const double x = embeddings[static_cast<size_t>(i)].v[static_cast<size_t>(j)];
      norm += x * x;
    }
    norm = std::sqrt(norm);
    require(norm > 1e-20, "ntxent_loss: zero-norm subvector");
    auto& ui = u[static_cast<size_t>(i)];
    ui.resize(static_cast<size_t>(d0));
    for (int j = 0; j < d0; ++j)
      ui[static_cast<size_t>(j)] = embeddings[static_cast<size_t>(i)].v[static_cast<size_t>(j)] / norm;
  }

  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    double mx = -1e300;
    std::vector<double> logits(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double dot = 0.0;
      for (int k = 0; k < d0; ++k) dot += u[static_cast<size_t>(i)][static_cast<size_t>(k)] * u[static_cast<size_t>(j)][static_cast<size_t>(k)];
      logits[static_cast<size_t>(j)] = dot / tau;
      mx = std::max(mx, logits[static_cast<size_t>(j)]);
    }
    double denom = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) denom += std::exp(logits[static_cast<size_t>(j)] - mx);
    loss += mx + std::log(denom) - logits[static_cast<size_t>(partners[static_cast<size_t>(i)])];
  }
  return loss / static_cast<double>(n);
}

double retrieval_top1(const std::vector<Embedding>& embeddings, const std::vector<int>& partners,
                      int d0) {
  const int n = static_cast<int>(embeddings.size());
  require(n >= 2, "retrieval_top1: need at least 2 embeddings");
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    double best = -1e300;
    int best_j = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (int k = 0; k < d0; ++k) {
        const double a = embeddings[static_cast<size_t>(i)].v[static_cast<size_t>(k)];
        const double b = embeddings[static_cast<size_t>(j)].v[static_cast<size_t>(k)];
        dot += a * b;
        ni += a * a;
        nj += b * b;
      }
      const double cos = dot / std::max(std::sqrt(ni * nj), 1e-20);
      if (cos > best) {
        best = cos;
        best_j = j;
      }
    }
    if (best_j == partners[static_cast<size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace mixstyle::enc
