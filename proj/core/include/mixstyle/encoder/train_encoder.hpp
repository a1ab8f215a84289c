#pragma once

#include <string>

#include "mixstyle/encoder/contrastive.hpp"
#include "mixstyle/encoder/scheduler.hpp"

namespace mixstyle::enc {

struct EncoderTrainConfig {
  EncoderConfig arch;
  fx::FxChainConfig fx;

  int batch_pairs = 128;         // N; a batch holds 2N manipulated mixes
  int iterations = 16000;
  int steps_per_iteration = 4;   // step k mixes k stem types
  CombinationMode combination_mode = CombinationMode::kStemsEqualStep;
  double lr = 2e-4;
  double seg_min_s = 5.9, seg_max_s = 11.8;
  int val_interval = 500;        // iterations between rescheduling
  int val_pairs = 4;             // pairs per single-FX validation batch
  int val_batches = 2;
  uint64_t seed = 17;
  int threads = 1;
  std::string out_dir;           // empty = no artifacts written

  void validate() const;
};

struct EncoderTrainResult {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_curve;  // one entry per iteration (mean over steps)
  SchedulerState scheduler;
  std::array<double, fx::kNumFx> final_val_losses{};
  int rejected_steps = 0;          // non-finite gradient events
};

// Mean single-FX NT-Xent loss per effect: batches whose chains apply only
// that effect (probability 1 for it, 0 for the rest).
std::array<double, fx::kNumFx> validate_single_fx(EncoderNet<float>& net,
                                                  const data::CorpusView& val_set,
                                                  const EncoderTrainConfig& cfg, uint64_t salt);

// Adam + cosine annealing over `iterations`; probability rescheduling at
// every validation interval; checkpoint and CSV log written to out_dir.
EncoderTrainResult train_encoder(const data::CorpusView& train_set,
                                 const data::CorpusView& val_set, EncoderTrainConfig cfg,
                                 EncoderNet<float>& net);

}  // namespace mixstyle::enc
