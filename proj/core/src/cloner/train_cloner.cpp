#include "mixstyle/cloner/train_cloner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mixstyle/common/parallel.hpp"
#include "mixstyle/fx/processors.hpp"
#include "mixstyle/nn/optimizer.hpp"

namespace mixstyle::cloner {

namespace fs = std::filesystem;

void ClonerTrainConfig::validate() const {
  arch.validate();
  loss.validate();
  fx.validate();
  require(batch >= 1, "ClonerTrainConfig: batch must be >= 1");
  require(epochs >= 1, "ClonerTrainConfig: epochs must be >= 1");
  require(segment_s > 0.0, "ClonerTrainConfig: segment_s must be positive");
  require(lr > 0.0, "ClonerTrainConfig: lr must be positive");
}

int steps_per_epoch(const data::CorpusView& corpus, double segment_s) {
  double min_total = 1e300;
  for (const auto& inst : corpus.instruments())
    min_total = std::min(min_total, corpus.total_nonsilent_seconds(inst));
  return std::max(1, static_cast<int>(min_total / segment_s));
}

namespace {

struct TrainPair {
  audio::AudioBuffer x, gt;
  enc::Embedding cond;
};

// one (x, ref) draw: same song, same instrument, disjoint segments
TrainPair make_pair(const data::CorpusView& corpus, const fx::FxChainConfig& fx_cfg,
                    double segment_s, enc::EncoderNet<float>& encoder, Rng& rng) {
  const auto instruments = corpus.instruments();
  const size_t need = static_cast<size_t>(segment_s * audio::kSampleRate);

  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto& inst = instruments[static_cast<size_t>(rng.randint(static_cast<int64_t>(instruments.size())))];
    const auto& song = corpus.songs[static_cast<size_t>(rng.randint(static_cast<int64_t>(corpus.songs.size())))];
    const auto& idx = song.nonsilent.at(inst);

    const auto s1 = data::sample_segment_start(idx, need, rng);
    if (!s1) continue;
    const auto s2 = data::sample_segment_start(idx, need, rng);
    if (!s2) continue;
    const bool disjoint = *s1 + need <= *s2 || *s2 + need <= *s1;
    if (!disjoint) continue;

    fx::FxChainInstance chain = fx::sample_chain(fx_cfg, rng);
    const auto& stem = song.stems.at(inst);
    TrainPair out;
    out.x = data::cut_segment(stem, *s1, need);
    const auto ref_seg = data::cut_segment(stem, *s2, need);
    const auto ref_wet = fx::apply_chain(ref_seg, chain);
    out.gt = fx::apply_chain(out.x, chain);
    out.cond = enc::encode(ref_wet, encoder);
    return out;
  }
  throw Error("train_cloner: could not draw two disjoint segments; corpus too short");
}

}  // namespace

ClonerTrainResult train_cloner(const data::CorpusView& train_set, const data::CorpusView& val_set,
                               enc::EncoderNet<float>& encoder, ClonerTrainConfig cfg,
                               ClonerNet<float>& net) {
  cfg.validate();
  require(net.cfg.condition_dim == encoder.cfg.embedding_dim,
          "train_cloner: encoder embedding and cloner condition dims differ");

  int total_steps = cfg.epochs * steps_per_epoch(train_set, cfg.segment_s);
  if (cfg.max_steps > 0) total_steps = std::min(total_steps, cfg.max_steps);

  nn::Adam<float> opt(net.params());
  nn::CosineSchedule schedule{cfg.lr, total_steps};

  ClonerTrainResult result;
  result.steps = total_steps;

  std::ofstream log;
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    log.open(fs::path(cfg.out_dir) / "training_log.csv", std::ios::trunc);
    log << "step,lr,loss\n";
  }

  for (int step = 0; step < total_steps; ++step) {
    const double lr = schedule.lr_at(step);

    // render the batch on workers, fixed slots
    std::vector<TrainPair> pairs(static_cast<size_t>(cfg.batch));
    parallel_for(cfg.batch, cfg.threads, [&](int64_t b) {
      Rng rng(mix_seed(cfg.seed, static_cast<uint64_t>(step), static_cast<uint64_t>(b)));
      pairs[static_cast<size_t>(b)] = make_pair(train_set, cfg.fx, cfg.segment_s, encoder, rng);
    });

    nn::Tape<float> tape;
    opt.zero_grad();
    nn::Var<float> loss;
    for (const auto& p : pairs) {
      auto xv = enc::audio_to_var<float>(p.x);
      auto gtv = enc::audio_to_var<float>(p.gt);
      auto cond = nn::make_var<float>({static_cast<int64_t>(p.cond.v.size())});
      cond->v = p.cond.v;
      auto y = net.forward(&tape, xv, cond);
      auto l = full_loss_var(&tape, gtv, y, cfg.loss);
      loss = loss ? nn::add(&tape, loss, l) : l;
    }
    loss = nn::scale(&tape, loss, 1.0f / static_cast<float>(cfg.batch));
    require(std::isfinite(loss->v[0]), "train_cloner: non-finite loss");
    tape.backward(loss);
    if (!opt.step(lr)) ++result.rejected_steps;

    result.loss_curve.push_back(loss->v[0]);
    if (log.is_open()) log << step << "," << lr << "," << loss->v[0] << "\n";
  }

  // final validation: system vs the untouched-input baseline
  double y_gt = 0.0, x_gt = 0.0;
  for (int v = 0; v < cfg.val_pairs; ++v) {
    Rng rng(mix_seed(cfg.seed, 0x636c76ull /* "clv" */, static_cast<uint64_t>(v)));
    TrainPair p = make_pair(val_set, cfg.fx, cfg.segment_s, encoder, rng);
    const auto y = tcn_forward(p.x, p.cond, net);
    y_gt += full_loss(p.gt, y, cfg.loss);
    x_gt += full_loss(p.gt, p.x, cfg.loss);
  }
  result.val_loss_y_gt = y_gt / cfg.val_pairs;
  result.val_loss_x_gt = x_gt / cfg.val_pairs;

  if (!cfg.out_dir.empty()) save_cloner(net, (fs::path(cfg.out_dir) / "cloner.ckpt").string());
  return result;
}

TransferResult transfer(const std::vector<std::pair<std::string, AudioBuffer>>& input_stems,
                        const AudioBuffer& ref, enc::EncoderNet<float>& encoder,
                        ClonerNet<float>& cloner, int threads) {
  require(!input_stems.empty(), "transfer: no input stems");
  const size_t len = input_stems.front().second.length();
  for (const auto& [name, b] : input_stems)
    require(b.length() == len, "transfer: stems of mismatched length: " + name);

  const enc::Embedding cond = enc::encode(ref, encoder);

  TransferResult out;
  out.stems.resize(input_stems.size());
  std::vector<AudioBuffer> converted(input_stems.size());
  parallel_for(static_cast<int64_t>(input_stems.size()), threads, [&](int64_t i) {
    converted[static_cast<size_t>(i)] = tcn_forward(input_stems[static_cast<size_t>(i)].second, cond, cloner);
  });

  out.mixture = AudioBuffer(len, ref.sample_rate);
  for (size_t i = 0; i < input_stems.size(); ++i) {
    out.stems[i] = {input_stems[i].first, converted[i]};
    for (int c = 0; c < 2; ++c)
      for (size_t j = 0; j < len; ++j)
        out.mixture.ch[static_cast<size_t>(c)][j] += converted[i].ch[static_cast<size_t>(c)][j];
  }
  return out;
}

}  // namespace mixstyle::cloner
