#include "mixstyle/encoder/train_encoder.hpp"

#include <filesystem>
#include <fstream>

#include "mixstyle/common/parallel.hpp"
#include "mixstyle/nn/optimizer.hpp"

namespace mixstyle::enc {

namespace fs = std::filesystem;

void EncoderTrainConfig::validate() const {
  arch.validate();
  fx.validate();
  require(batch_pairs >= 2, "EncoderTrainConfig: need at least 2 pairs per batch");
  require(iterations >= 1, "EncoderTrainConfig: iterations must be >= 1");
  require(steps_per_iteration >= 1 && steps_per_iteration <= 4,
          "EncoderTrainConfig: steps_per_iteration must be in [1, 4]");
  require(lr > 0.0, "EncoderTrainConfig: lr must be positive");
  require(seg_min_s > 0.0 && seg_max_s >= seg_min_s, "EncoderTrainConfig: bad segment range");
  require(val_interval >= 1, "EncoderTrainConfig: val_interval must be >= 1");
}

namespace {

// forward a rendered batch and return the NT-Xent loss node
nn::Var<float> batch_loss(nn::Tape<float>* tape, EncoderNet<float>& net,
                          const std::vector<audio::AudioBuffer>& mixes,
                          const std::vector<int>& partners, bool training) {
  std::vector<nn::Var<float>> inputs;
  inputs.reserve(mixes.size());
  for (const auto& m : mixes) inputs.push_back(audio_to_var<float>(m));
  auto embs = net.forward(tape, inputs, training);
  auto stacked = nn::concat_rows(tape, embs);
  return ntxent_loss_var(tape, stacked, partners, net.cfg.tau, net.cfg.d0);
}

}  // namespace

std::array<double, fx::kNumFx> validate_single_fx(EncoderNet<float>& net,
                                                  const data::CorpusView& val_set,
                                                  const EncoderTrainConfig& cfg, uint64_t salt) {
  std::array<double, fx::kNumFx> losses{};
  for (int f = 0; f < fx::kNumFx; ++f) {
    if (cfg.fx.probabilities[static_cast<size_t>(f)] <= 0.0) continue;  // inactive effect
    std::array<double, fx::kNumFx> probs{};
    probs[static_cast<size_t>(f)] = 1.0;
    double acc = 0.0;
    for (int b = 0; b < cfg.val_batches; ++b) {
      Rng rng(mix_seed(cfg.seed, 0x76616cull /* "val" */,
                       salt * 64 + static_cast<uint64_t>(f) * 8 + static_cast<uint64_t>(b)));
      const int stems = cfg.combination_mode == CombinationMode::kStemsEqualStep
                            ? 1 + b % static_cast<int>(val_set.instruments().size())
                            : 1;
      auto plan = plan_contrastive_batch(val_set, cfg.fx, probs, cfg.val_pairs, stems,
                                         cfg.seg_min_s, cfg.seg_max_s, rng, CombinationMode::kStemsEqualStep);
      const auto mixes = render_batch(val_set, plan, cfg.threads);
      std::vector<Embedding> embs;
      embs.reserve(mixes.size());
      for (const auto& m : mixes) embs.push_back(encode(m, net));
      acc += ntxent_loss(embs, plan.partners, net.cfg.tau, net.cfg.d0);
    }
    losses[static_cast<size_t>(f)] = acc / cfg.val_batches;
  }
  return losses;
}

EncoderTrainResult train_encoder(const data::CorpusView& train_set,
                                 const data::CorpusView& val_set, EncoderTrainConfig cfg,
                                 EncoderNet<float>& net) {
  cfg.validate();
  require(net.cfg.embedding_dim == cfg.arch.embedding_dim,
          "train_encoder: net does not match config");

  nn::Adam<float> opt(net.params());
  nn::CosineSchedule schedule{cfg.lr, cfg.iterations};

  // all active probabilities start at 1.0; effects the config disables
  // stay disabled through every reschedule
  std::array<bool, fx::kNumFx> active;
  for (int f = 0; f < fx::kNumFx; ++f)
    active[static_cast<size_t>(f)] = cfg.fx.probabilities[static_cast<size_t>(f)] > 0.0;
  SchedulerState scheduler;
  for (int f = 0; f < fx::kNumFx; ++f)
    scheduler.probabilities[static_cast<size_t>(f)] = active[static_cast<size_t>(f)] ? 1.0 : 0.0;

  EncoderTrainResult result;
  const int n_instruments = static_cast<int>(train_set.instruments().size());

  std::ofstream log;
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    log.open(fs::path(cfg.out_dir) / "training_log.csv", std::ios::trunc);
    log << "iteration,lr,loss";
    for (int f = 0; f < fx::kNumFx; ++f) log << ",val_" << fx::fx_name(static_cast<fx::FxKind>(f));
    for (int f = 0; f < fx::kNumFx; ++f) log << ",p_" << fx::fx_name(static_cast<fx::FxKind>(f));
    log << "\n";
  }

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double lr = schedule.lr_at(iter);
    double iter_loss = 0.0;
    for (int step = 0; step < cfg.steps_per_iteration; ++step) {
      Rng rng(mix_seed(cfg.seed, static_cast<uint64_t>(iter), static_cast<uint64_t>(step)));
      const int stems = cfg.combination_mode == CombinationMode::kStemsEqualStep
                            ? std::min(step + 1, n_instruments)
                            : 1;
      auto plan = plan_contrastive_batch(train_set, cfg.fx, scheduler.probabilities,
                                         cfg.batch_pairs, stems, cfg.seg_min_s, cfg.seg_max_s, rng,
                                         cfg.combination_mode);
      const auto mixes = render_batch(train_set, plan, cfg.threads);

      nn::Tape<float> tape;
      opt.zero_grad();
      auto loss = batch_loss(&tape, net, mixes, plan.partners, true);
      require(std::isfinite(loss->v[0]), "train_encoder: non-finite loss");
      tape.backward(loss);
      if (!opt.step(lr)) ++result.rejected_steps;
      iter_loss += loss->v[0];
    }
    iter_loss /= cfg.steps_per_iteration;
    result.loss_curve.push_back(iter_loss);
    if (iter == 0) result.initial_loss = iter_loss;

    const bool validate_now = (iter + 1) % cfg.val_interval == 0 || iter + 1 == cfg.iterations;
    if (validate_now) {
      const auto losses = validate_single_fx(net, val_set, cfg, static_cast<uint64_t>(iter));
      scheduler = reschedule_probabilities(losses, active);
      result.final_val_losses = losses;
    }
    if (log.is_open()) {
      log << iter << "," << lr << "," << iter_loss;
      for (int f = 0; f < fx::kNumFx; ++f)
        log << "," << (validate_now ? std::to_string(result.final_val_losses[static_cast<size_t>(f)]) : "");
      for (int f = 0; f < fx::kNumFx; ++f) log << "," << scheduler.probabilities[static_cast<size_t>(f)];
      log << "\n";
    }
  }

  result.final_loss = result.loss_curve.back();
  result.scheduler = scheduler;

  if (!cfg.out_dir.empty()) save_encoder(net, (fs::path(cfg.out_dir) / "encoder.ckpt").string());
  return result;
}

}  // namespace mixstyle::enc
