#pragma once

#include <vector>

#include "mixstyle/data/dataset.hpp"
#include "mixstyle/encoder/encoder.hpp"
#include "mixstyle/fx/chain.hpp"

namespace mixstyle::enc {

// How the per-iteration steps pick stem-type combinations: the k-th of the
// 4 steps mixes k distinct stem types, or a random combination per step.
enum class CombinationMode { kStemsEqualStep, kRandomCombination };

struct ContentRef {
  int song = 0;
  size_t start = 0;     // aligned across the chosen stems
  size_t length = 0;    // samples
};

// Structure of one contrastive batch before any audio is rendered. The
// three batch invariants are established here and auditable without DSP.
struct BatchPlan {
  std::vector<fx::FxChainInstance> chains;  // N instances
  std::vector<ContentRef> contents;         // N contents
  struct Item {
    int content;
    int chain;
  };
  std::vector<Item> items;      // 2N samples; positives are (2j, 2j+1)
  std::vector<int> partners;    // partner index per item
  std::vector<std::string> stem_types;  // shared by every sample in the batch

  void audit() const;  // throws on any invariant violation
};

// Draws N contents and N chain instances; instance j is applied to contents
// j and j+1 (mod N), so each content appears exactly twice under two
// different instances. Ring neighbors never share a song.
BatchPlan plan_contrastive_batch(const data::CorpusView& corpus, const fx::FxChainConfig& fx_config,
                                 const std::array<double, fx::kNumFx>& probabilities, int n_pairs,
                                 int n_stem_types, double seg_min_s, double seg_max_s, Rng& rng,
                                 CombinationMode mode = CombinationMode::kStemsEqualStep);

// Chain applied to each stem individually, then mixed.
audio::AudioBuffer render_batch_item(const data::CorpusView& corpus, const BatchPlan& plan,
                                     int item);

std::vector<audio::AudioBuffer> render_batch(const data::CorpusView& corpus, const BatchPlan& plan,
                                             int threads = 1);

// NT-Xent on the [0 : d0) subvectors, evaluation path (double precision).
// Cosine similarities, per-anchor cross-entropy of the positive against all
// 2N-2 negatives, averaged over all 2N anchors.
double ntxent_loss(const std::vector<Embedding>& embeddings, const std::vector<int>& partners,
                   double tau, int d0);

// Training path: same loss as a graph over the stacked embedding matrix.
template <typename T>
nn::Var<T> ntxent_loss_var(nn::Tape<T>* tape, const nn::Var<T>& embeddings,
                           const std::vector<int>& partners, double tau, int d0) {
  require(embeddings->shape.size() == 2, "ntxent_loss_var: need [2N, D]");
  require(embeddings->shape[0] >= 4, "ntxent_loss_var: need at least 2 pairs");
  auto sub = nn::slice_cols(tape, embeddings, 0, d0);
  auto unit = nn::row_normalize(tape, sub);
  auto sim = nn::matmul_nt(tape, unit, unit);
  auto logits = nn::scale(tape, sim, static_cast<T>(1.0 / tau));
  return nn::paired_infonce(tape, logits, partners);
}

// Fraction of anchors whose nearest neighbor (cosine over the d0 prefix,
// self excluded) is their positive partner.
double retrieval_top1(const std::vector<Embedding>& embeddings, const std::vector<int>& partners,
                      int d0);

}  // namespace mixstyle::enc
