#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define MIXSTYLE_TEST_NEEDS_CORPUS
#include <filesystem>

#include "helpers.hpp"
#include "mixstyle/encoder/train_encoder.hpp"

using namespace mixstyle;
using namespace testutil;
using mixstyle::data::synth_stem;

namespace {

enc::EncoderConfig tiny_arch() {
  auto cfg = enc::EncoderConfig::toy(32, 8, 4, 4);
  cfg.init_seed = 11;
  return cfg;
}

// independent brute-force NT-Xent: explicit loops, no shared code path
double brute_force_ntxent(const std::vector<enc::Embedding>& embs, const std::vector<int>& partners,
                          double tau, int d0) {
  const int n = static_cast<int>(embs.size());
  auto cosine = [&](int i, int j) {
    double dot = 0.0, ni = 0.0, nj = 0.0;
    for (int k = 0; k < d0; ++k) {
      dot += static_cast<double>(embs[i].v[k]) * embs[j].v[k];
      ni += static_cast<double>(embs[i].v[k]) * embs[i].v[k];
      nj += static_cast<double>(embs[j].v[k]) * embs[j].v[k];
    }
    return dot / std::sqrt(ni * nj);
  };
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pos = std::exp(cosine(i, partners[i]) / tau);
    double denom = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) denom += std::exp(cosine(i, j) / tau);
    total += -std::log(pos / denom);
  }
  return total / n;
}

std::vector<enc::Embedding> random_embeddings(int n, int d, uint64_t seed) {
  Rng rng(seed);
  std::vector<enc::Embedding> out(n);
  for (auto& e : out) {
    e.v.resize(d);
    for (auto& v : e.v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  return out;
}

std::vector<int> ring_partners(int pairs) {
  std::vector<int> p;
  for (int j = 0; j < pairs; ++j) {
    p.push_back(2 * j + 1);
    p.push_back(2 * j);
  }
  return p;
}

}  // namespace

TEST_CASE("encode is deterministic and duration independent in dimension") {
  enc::EncoderNet<float> net(tiny_arch());
  const auto a = synth_stem("bass", 0.3, 5);
  const auto e1 = enc::encode(a, net);
  const auto e2 = enc::encode(a, net);
  CHECK(e1.v == e2.v);

  const auto b = synth_stem("bass", 0.6, 6);
  const auto e3 = enc::encode(b, net);
  CHECK(e3.v.size() == e1.v.size());
}

TEST_CASE("constant input and its repetition produce nearly identical embeddings") {
  enc::EncoderNet<float> net(tiny_arch());
  audio::AudioBuffer c1(static_cast<size_t>(0.8 * audio::kSampleRate));
  for (auto& ch : c1.ch)
    for (auto& s : ch) s = 0.3f;
  audio::AudioBuffer c2(c1.length() * 2);
  for (auto& ch : c2.ch)
    for (auto& s : ch) s = 0.3f;
  const auto e1 = enc::encode(c1, net);
  const auto e2 = enc::encode(c2, net);
  double m = 0.0;
  for (size_t i = 0; i < e1.v.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(e1.v[i]) - e2.v[i]));
  CHECK(m < 1e-4);
}

TEST_CASE("encode rejects too-short input") {
  enc::EncoderNet<float> net(tiny_arch());
  audio::AudioBuffer shorty(4);
  CHECK_THROWS_AS((void)enc::encode(shorty, net), Error);
}

TEST_CASE("encoder checkpoint round-trips bit-exactly") {
  enc::EncoderNet<float> net(tiny_arch());
  const auto path = (std::filesystem::temp_directory_path() / "mixstyle_enc.ckpt").string();
  enc::save_encoder(net, path);
  auto back = enc::load_encoder(path);
  const auto x = synth_stem("vocals", 0.3, 7);
  CHECK(enc::encode(x, net).v == enc::encode(x, back).v);
}

TEST_CASE("batch plans satisfy the three invariants across many draws") {
  const auto corpus = tiny_corpus(4, 2.0, 91);
  fx::FxChainConfig fx_cfg;
  fx_cfg.ranges.reverb_rt60_lo = 0.1;
  fx_cfg.ranges.reverb_rt60_hi = 0.3;
  std::array<double, fx::kNumFx> probs;
  probs.fill(0.5);
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const int pairs = 2 + static_cast<int>(rng.randint(4));
    const int stems = 1 + static_cast<int>(rng.randint(4));
    auto plan = enc::plan_contrastive_batch(corpus, fx_cfg, probs, pairs, stems, 0.3, 0.6, rng);
    plan.audit();  // throws on violation
    CHECK(static_cast<int>(plan.items.size()) == 2 * pairs);
  }
}

TEST_CASE("N = 2 batch has 4 samples, 2 pairs, 2 in-batch negatives each") {
  const auto corpus = tiny_corpus(3, 1.5, 92);
  fx::FxChainConfig fx_cfg;
  std::array<double, fx::kNumFx> probs;
  probs.fill(1.0);
  Rng rng(5);
  auto plan = enc::plan_contrastive_batch(corpus, fx_cfg, probs, 2, 1, 0.3, 0.5, rng);
  CHECK(plan.items.size() == 4);
  for (int i = 0; i < 4; ++i) {
    int negatives = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i && j != plan.partners[static_cast<size_t>(i)]) ++negatives;
    CHECK(negatives == 2);
  }
}

TEST_CASE("scheduled probability drives the empirical application rate") {
  const auto corpus = tiny_corpus(3, 1.5, 93);
  fx::FxChainConfig fx_cfg;
  std::array<double, fx::kNumFx> probs;
  probs.fill(0.5);
  probs[static_cast<size_t>(fx::FxKind::kReverb)] = 0.1;

  Rng rng(31);
  int reverb_count = 0, chains = 0;
  while (chains < 5000) {  // 10,000 samples = 5,000 chains
    auto plan = enc::plan_contrastive_batch(corpus, fx_cfg, probs, 10, 1, 0.2, 0.3, rng);
    for (const auto& c : plan.chains) {
      if (c.applied[static_cast<size_t>(fx::FxKind::kReverb)]) ++reverb_count;
      ++chains;
    }
  }
  const double rate = static_cast<double>(reverb_count) / chains;
  CHECK(std::fabs(rate - 0.1) < 0.01);
}

TEST_CASE("ntxent closed forms") {
  // all 2N embeddings identical: loss = ln(2N - 1)
  for (int pairs : {2, 4, 8}) {
    std::vector<enc::Embedding> embs(static_cast<size_t>(2 * pairs));
    for (auto& e : embs) e.v = {1.0f, 0.5f, -0.25f, 0.125f};
    const double loss = enc::ntxent_loss(embs, ring_partners(pairs), 0.1, 4);
    CHECK(loss == doctest::Approx(std::log(2.0 * pairs - 1.0)).epsilon(1e-6));
  }

  // two pairs, identical positives, orthogonal across pairs, tau = 0.1:
  // loss = ln(1 + 2 e^-10)
  std::vector<enc::Embedding> embs(4);
  embs[0].v = {1.0f, 0.0f};
  embs[1].v = {1.0f, 0.0f};
  embs[2].v = {0.0f, 1.0f};
  embs[3].v = {0.0f, 1.0f};
  const double loss = enc::ntxent_loss(embs, ring_partners(2), 0.1, 2);
  CHECK(loss == doctest::Approx(std::log(1.0 + 2.0 * std::exp(-10.0))).epsilon(1e-6));
}

TEST_CASE("ntxent matches the brute-force oracle on random batches") {
  Rng rng(777);
  for (int trial = 0; trial < 25; ++trial) {
    const int pairs = 2 + static_cast<int>(rng.randint(15));  // 2N <= 32
    const int d = 6 + static_cast<int>(rng.randint(20));
    const int d0 = 2 + static_cast<int>(rng.randint(static_cast<int64_t>(d - 2)));
    const auto embs = random_embeddings(2 * pairs, d, rng.next_u64());
    const auto partners = ring_partners(pairs);
    const double got = enc::ntxent_loss(embs, partners, 0.1, d0);
    const double want = brute_force_ntxent(embs, partners, 0.1, d0);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("tensor ntxent agrees with the evaluation path and honors the subvector contract") {
  const int pairs = 3, d = 10, d0 = 4;
  const auto embs = random_embeddings(2 * pairs, d, 404);
  const auto partners = ring_partners(pairs);

  auto z = nn::make_var<double>({2 * pairs, d}, true);
  for (int i = 0; i < 2 * pairs; ++i)
    for (int j = 0; j < d; ++j) z->v[static_cast<size_t>(i * d + j)] = embs[static_cast<size_t>(i)].v[static_cast<size_t>(j)];

  nn::Tape<double> tape;
  auto loss = enc::ntxent_loss_var(&tape, z, partners, 0.1, d0);
  CHECK(loss->v[0] == doctest::Approx(enc::ntxent_loss(embs, partners, 0.1, d0)).epsilon(1e-9));

  tape.backward(loss);
  // gradients beyond the d0 prefix are identically zero
  bool prefix_nonzero = false;
  for (int i = 0; i < 2 * pairs; ++i) {
    for (int j = 0; j < d; ++j) {
      const double g = z->g[static_cast<size_t>(i * d + j)];
      if (j >= d0) CHECK(g == 0.0);
      else prefix_nonzero = prefix_nonzero || g != 0.0;
    }
  }
  CHECK(prefix_nonzero);
}

TEST_CASE("reschedule_probabilities examples") {
  const auto s = enc::reschedule_probabilities({1, 2, 3, 4, 5, 6});
  const std::array<double, 6> want = {0.1, 0.28, 0.46, 0.64, 0.82, 1.0};
  for (int i = 0; i < 6; ++i) CHECK(s.probabilities[static_cast<size_t>(i)] == doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));

  const auto flat = enc::reschedule_probabilities({2, 2, 2, 2, 2, 2});
  for (double p : flat.probabilities) CHECK(p == 1.0);

  CHECK_THROWS_AS((void)enc::reschedule_probabilities({1, 2, 3, 4, 5, std::nan("")}), Error);

  // monotone over random loss vectors, range always within [0.1, 1.0]
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    std::array<double, 6> losses;
    for (auto& l : losses) l = rng.uniform(0.0, 8.0);
    const auto state = enc::reschedule_probabilities(losses);
    state.validate();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (losses[static_cast<size_t>(i)] > losses[static_cast<size_t>(j)])
          CHECK(state.probabilities[static_cast<size_t>(i)] >= state.probabilities[static_cast<size_t>(j)]);
  }
}

TEST_CASE("tiny training run is reproducible and reduces the loss") {
  const auto train = tiny_corpus(4, 2.5, 95);
  const auto val = tiny_corpus(2, 2.5, 96);

  enc::EncoderTrainConfig cfg;
  cfg.arch = tiny_arch();
  cfg.fx.probabilities.fill(0.0);
  cfg.fx.probabilities[static_cast<size_t>(fx::FxKind::kLoudness)] = 1.0;
  cfg.fx.probabilities[static_cast<size_t>(fx::FxKind::kPan)] = 1.0;
  cfg.batch_pairs = 4;
  cfg.iterations = 6;
  cfg.steps_per_iteration = 1;
  cfg.lr = 2e-3;
  cfg.seg_min_s = 0.3;
  cfg.seg_max_s = 0.5;
  cfg.val_interval = 6;
  cfg.val_pairs = 2;
  cfg.val_batches = 1;
  cfg.seed = 123;

  enc::EncoderNet<float> net_a(cfg.arch);
  const auto ra = enc::train_encoder(train, val, cfg, net_a);
  enc::EncoderNet<float> net_b(cfg.arch);
  const auto rb = enc::train_encoder(train, val, cfg, net_b);

  REQUIRE(ra.loss_curve.size() == rb.loss_curve.size());
  for (size_t i = 0; i < ra.loss_curve.size(); ++i) CHECK(ra.loss_curve[i] == rb.loss_curve[i]);
  for (double l : ra.loss_curve) CHECK(std::isfinite(l));
  CHECK(ra.rejected_steps == 0);
  // scheduler ran at the end
  ra.scheduler.validate();
}

TEST_CASE("validate_single_fx is deterministic and near chance at init") {
  const auto val = tiny_corpus(3, 2.5, 97);
  enc::EncoderTrainConfig cfg;
  cfg.arch = tiny_arch();
  cfg.val_pairs = 4;
  cfg.val_batches = 1;
  cfg.seg_min_s = 0.3;
  cfg.seg_max_s = 0.5;
  cfg.fx.ranges.reverb_rt60_lo = 0.1;
  cfg.fx.ranges.reverb_rt60_hi = 0.3;
  cfg.seed = 55;

  enc::EncoderNet<float> net(cfg.arch);
  const auto a = enc::validate_single_fx(net, val, cfg, 0);
  const auto b = enc::validate_single_fx(net, val, cfg, 0);
  for (int f = 0; f < fx::kNumFx; ++f) CHECK(a[static_cast<size_t>(f)] == b[static_cast<size_t>(f)]);

  // untrained random encoder sits near the chance-level loss ln(2N-1)
  const double chance = std::log(2.0 * cfg.val_pairs - 1.0);
  for (double l : a) CHECK(std::fabs(l - chance) / chance < 0.35);
}

TEST_CASE("encoder trained on a pan-only task ranks pan lowest in single-FX validation") {
  const auto train = tiny_corpus(4, 2.5, 205);
  const auto val = tiny_corpus(2, 2.5, 206);

  enc::EncoderTrainConfig cfg;
  cfg.arch = enc::EncoderConfig::toy(32, 8, 4, 4);
  cfg.arch.init_seed = 41;
  cfg.fx.probabilities.fill(0.0);
  cfg.fx.probabilities[static_cast<size_t>(fx::FxKind::kPan)] = 1.0;
  cfg.batch_pairs = 4;
  cfg.iterations = 60;
  cfg.steps_per_iteration = 1;
  cfg.lr = 3e-3;
  cfg.seg_min_s = 0.3;
  cfg.seg_max_s = 0.5;
  cfg.val_interval = 60;
  cfg.val_pairs = 4;
  cfg.val_batches = 2;
  cfg.seed = 207;

  enc::EncoderNet<float> net(cfg.arch);
  (void)enc::train_encoder(train, val, cfg, net);

  // measure all six effects; keep reverb cheap
  enc::EncoderTrainConfig probe = cfg;
  probe.fx.probabilities.fill(1.0);
  probe.fx.ranges.reverb_rt60_lo = 0.1;
  probe.fx.ranges.reverb_rt60_hi = 0.3;
  const auto losses = enc::validate_single_fx(net, val, probe, 99);

  const double pan_loss = losses[static_cast<size_t>(fx::FxKind::kPan)];
  for (int f = 0; f < fx::kNumFx; ++f) {
    if (f == static_cast<int>(fx::FxKind::kPan)) continue;
    CHECK(pan_loss < losses[static_cast<size_t>(f)]);
  }
}
