#pragma once

#include <string>

#include "mixstyle/cloner/spectral_loss.hpp"
#include "mixstyle/cloner/tcn.hpp"
#include "mixstyle/data/dataset.hpp"
#include "mixstyle/fx/chain.hpp"

namespace mixstyle::cloner {

struct ClonerTrainConfig {
  TcnConfig arch;
  SpectralLossConfig loss;
  fx::FxChainConfig fx;

  int batch = 8;
  int epochs = 100;
  int max_steps = 0;        // > 0 caps the epoch-derived step count
  double segment_s = 11.8;  // duration of x and ref
  double lr = 2e-4;
  int val_interval = 50;
  int val_pairs = 4;
  uint64_t seed = 17;
  int threads = 1;
  std::string out_dir;

  void validate() const;
};

struct ClonerTrainResult {
  std::vector<double> loss_curve;
  double val_loss_y_gt = 0.0;  // system output vs ground truth
  double val_loss_x_gt = 0.0;  // untouched input vs ground truth
  int steps = 0;
  int rejected_steps = 0;
};

// steps per epoch = min over instruments of total non-silent duration
// divided by the segment length.
int steps_per_epoch(const data::CorpusView& corpus, double segment_s);

// Per step: stem type, two disjoint segments, one chain instance;
// ref' = chain(ref), gt = chain(x); y = tcn(x, encode(ref')); minimize
// full_loss(gt, y). Encoder weights stay frozen.
ClonerTrainResult train_cloner(const data::CorpusView& train_set, const data::CorpusView& val_set,
                               enc::EncoderNet<float>& encoder, ClonerTrainConfig cfg,
                               ClonerNet<float>& net);

struct TransferResult {
  std::vector<std::pair<std::string, AudioBuffer>> stems;
  AudioBuffer mixture;
};

// Encodes ref once, converts each stem independently with that condition,
// sums into the mixture. Pre-separated stems from any source are accepted.
TransferResult transfer(const std::vector<std::pair<std::string, AudioBuffer>>& input_stems,
                        const AudioBuffer& ref, enc::EncoderNet<float>& encoder,
                        ClonerNet<float>& cloner, int threads = 1);

}  // namespace mixstyle::cloner
