#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "mixstyle/audio/wav.hpp"
#include "mixstyle/fx/chain.hpp"
#include "mixstyle/fx/processors.hpp"

using namespace mixstyle;
using namespace testutil;

TEST_CASE("eq with all gains at 0 dB is identity within 1e-6 RMS") {
  const auto b = noise(0.2, 41, 0.4);
  fx::EqParams params;
  params.bands = {{fx::EqBandType::kPeaking, 1000.0, 0.0, 1.0},
                  {fx::EqBandType::kLowShelf, 120.0, 0.0, 0.7},
                  {fx::EqBandType::kHighShelf, 8000.0, 0.0, 0.7}};
  CHECK(rms_diff(fx::apply_eq(b, params), b) < 1e-6);
}

TEST_CASE("peaking band gain at center frequency matches the analytic response") {
  // steady-state amplitude ratio of a 1 kHz sine through +12 dB @ 1 kHz, Q 1
  fx::EqParams params;
  params.bands = {{fx::EqBandType::kPeaking, 1000.0, 12.0, 1.0}};
  const auto in = sine(1000.0, 1.0, 0.1);
  const auto out = fx::apply_eq(in, params);

  // measure over the middle to skip the transient
  double num = 0.0, den = 0.0;
  for (size_t i = in.length() / 4; i < 3 * in.length() / 4; ++i) {
    num += static_cast<double>(out.left()[i]) * out.left()[i];
    den += static_cast<double>(in.left()[i]) * in.left()[i];
  }
  const double ratio = std::sqrt(num / den);
  CHECK(ratio == doctest::Approx(std::pow(10.0, 12.0 / 20.0)).epsilon(0.02));

  // and the analytic |H| at center equals 10^(12/20) exactly
  CHECK(fx::eq_band_magnitude(params.bands[0], 1000.0) ==
        doctest::Approx(std::pow(10.0, 12.0 / 20.0)).epsilon(1e-6));
}

TEST_CASE("low shelf far below a high sine leaves it untouched") {
  fx::EqParams params;
  params.bands = {{fx::EqBandType::kLowShelf, 100.0, 6.0, 0.707}};
  const auto in = sine(10000.0, 0.5, 0.1);
  const auto out = fx::apply_eq(in, params);
  double num = 0.0, den = 0.0;
  for (size_t i = in.length() / 4; i < 3 * in.length() / 4; ++i) {
    num += static_cast<double>(out.left()[i]) * out.left()[i];
    den += static_cast<double>(in.left()[i]) * in.left()[i];
  }
  const double change_db = 10.0 * std::log10(num / den);
  CHECK(std::fabs(change_db) < 0.1);
}

TEST_CASE("drc with ratio 1 is identity") {
  const auto b = noise(0.2, 42, 0.5);
  fx::DrcParams p;
  p.ratio = 1.0;
  p.makeup_db = 0.0;
  p.knee_db = 3.0;
  CHECK(rms_diff(fx::apply_drc(b, p), b) < 1e-6);
}

TEST_CASE("drc below threshold minus half knee is identity") {
  auto b = noise(0.2, 43, 0.01);  // about -40 dBFS peaks
  fx::DrcParams p;
  p.threshold_db = -20.0;
  p.ratio = 4.0;
  p.knee_db = 6.0;
  CHECK(rms_diff(fx::apply_drc(b, p), b) < 1e-6);
}

TEST_CASE("drc static curve: constant full-scale input settles at -15 dBFS") {
  audio::AudioBuffer b(audio::kSampleRate);
  for (auto& s : b.left()) s = 1.0f;
  for (auto& s : b.right()) s = 1.0f;
  fx::DrcParams p;
  p.threshold_db = -20.0;
  p.ratio = 4.0;
  p.knee_db = 0.0;
  p.attack_ms = 5.0;
  p.release_ms = 50.0;
  const auto out = fx::apply_drc(b, p);
  // steady state well past the attack transient
  const double level_db = 20.0 * std::log10(std::fabs(out.left()[b.length() - 1]));
  CHECK(level_db == doctest::Approx(-15.0).epsilon(0.5 / 15.0));
}

TEST_CASE("pan center on mono-identical input is identity") {
  auto b = sine(440.0, 0.05, 0.3);
  fx::PanParams p;
  p.angle = M_PI / 4.0;
  CHECK(max_abs_diff(fx::apply_pan(b, p), b) < 1e-6);
}

TEST_CASE("pan hard left silences the right channel") {
  const auto b = noise(0.05, 44, 0.3);
  fx::PanParams p;
  p.angle = 0.0;
  const auto out = fx::apply_pan(b, p);
  for (float s : out.right()) CHECK(s == 0.0f);
}

TEST_CASE("constant-power pan keeps summed energy independent of angle") {
  const auto b = noise(0.1, 45, 0.3);
  double ref_energy = -1.0;
  for (double angle : {0.0, M_PI / 8.0, M_PI / 4.0, 3.0 * M_PI / 8.0, M_PI / 2.0}) {
    fx::PanParams p;
    p.angle = angle;
    const auto out = fx::apply_pan(b, p);
    double e = 0.0;
    for (size_t i = 0; i < out.length(); ++i)
      e += static_cast<double>(out.left()[i]) * out.left()[i] +
           static_cast<double>(out.right()[i]) * out.right()[i];
    if (ref_energy < 0.0) ref_energy = e;
    CHECK(e == doctest::Approx(ref_energy).epsilon(1e-6));
  }
}

TEST_CASE("imager examples") {
  const auto b = noise(0.05, 46, 0.3);
  fx::ImagerParams unit;
  unit.side_gain = 1.0;
  CHECK(max_abs_diff(fx::apply_imager(b, unit), b) < 1e-6);

  fx::ImagerParams collapse;
  collapse.side_gain = 0.0;
  const auto mono = fx::apply_imager(b, collapse);
  for (size_t i = 0; i < b.length(); ++i) {
    CHECK(mono.left()[i] == mono.right()[i]);
    CHECK(mono.left()[i] == doctest::Approx(0.5 * (b.left()[i] + b.right()[i])).epsilon(1e-5));
  }

  audio::AudioBuffer unitv(1);
  unitv.left()[0] = 1.0f;
  unitv.right()[0] = 0.0f;
  fx::ImagerParams twice;
  twice.side_gain = 2.0;
  const auto wide = fx::apply_imager(unitv, twice);
  CHECK(wide.left()[0] == doctest::Approx(1.5));
  CHECK(wide.right()[0] == doctest::Approx(-0.5));
}

TEST_CASE("reverb with unit impulse IR at wet 1 is identity") {
  const auto b = noise(0.1, 47, 0.3);
  audio::AudioBuffer ir(64);
  ir.left()[0] = 1.0f;
  ir.right()[0] = 1.0f;
  const auto path = (std::filesystem::temp_directory_path() / "mixstyle_unit_ir.wav").string();
  audio::write_wav(ir, path, audio::WavBitDepth::kFloat32);

  fx::ReverbParams p;
  p.ir_path = path;
  p.wet = 1.0;
  CHECK(max_abs_diff(fx::apply_reverb(b, p), b) < 1e-6);
}

TEST_CASE("reverb with wet 0 is identity exactly") {
  const auto b = noise(0.1, 48, 0.3);
  fx::ReverbParams p;
  p.wet = 0.0;
  p.rt60_s = 0.5;
  p.ir_seed = 7;
  CHECK(max_abs_diff(fx::apply_reverb(b, p), b) == 0.0);
}

TEST_CASE("reverb matches the naive convolution oracle") {
  const auto b = noise(0.02, 49, 0.4);
  fx::ReverbParams p;
  p.rt60_s = 0.1;
  p.wet = 0.6;
  p.ir_seed = 99;
  p.pre_delay_ms = 2.0;
  const auto ir = fx::synth_impulse_response(p);
  const auto out = fx::apply_reverb(b, p);

  for (int c = 0; c < 2; ++c) {
    const auto conv = naive_convolve(b.ch[static_cast<size_t>(c)], ir.ch[static_cast<size_t>(c)]);
    for (size_t i = 0; i < b.length(); ++i) {
      const double want = 0.4 * b.ch[static_cast<size_t>(c)][i] + 0.6 * conv[i];
      CHECK(std::fabs(out.ch[static_cast<size_t>(c)][i] - want) <= 1e-5 * std::max(1.0, std::fabs(want)));
    }
  }
}

TEST_CASE("loudness fx composes additively") {
  const auto b = noise(0.05, 50, 0.1);
  fx::LoudnessParams g1, g2, g3;
  g1.gain_db = 3.5;
  g2.gain_db = -1.25;
  const auto seq = fx::apply_loudness(fx::apply_loudness(b, g1), g2);
  g3.gain_db = g1.gain_db + g2.gain_db;
  CHECK(max_abs_diff(seq, fx::apply_loudness(b, g3)) < 1e-7);
}

TEST_CASE("chain with empty mask is bit-exact identity") {
  const auto b = noise(0.05, 51, 0.3);
  fx::FxChainInstance inst;  // nothing applied
  CHECK(max_abs_diff(fx::apply_chain(b, inst), b) == 0.0);
}

TEST_CASE("chain with only loudness equals apply_gain_db") {
  const auto b = noise(0.05, 52, 0.3);
  fx::FxChainInstance inst;
  inst.applied[static_cast<int>(fx::FxKind::kLoudness)] = true;
  inst.loudness.gain_db = -4.5;
  CHECK(max_abs_diff(fx::apply_chain(b, inst), audio::apply_gain_db(b, -4.5)) == 0.0);
}

TEST_CASE("pan-imager order matters on asymmetric stereo input") {
  auto b = noise(0.05, 53, 0.3);
  for (size_t i = 0; i < b.length(); ++i) b.right()[i] *= 0.2f;  // asymmetric

  fx::FxChainInstance ab;
  ab.applied[static_cast<int>(fx::FxKind::kPan)] = true;
  ab.applied[static_cast<int>(fx::FxKind::kImager)] = true;
  ab.pan.angle = M_PI / 8.0;
  ab.imager.side_gain = 1.8;

  fx::FxChainInstance ba = ab;
  std::swap(ba.order[2], ba.order[3]);

  const auto out_ab = fx::apply_chain(b, ab);
  const auto out_ba = fx::apply_chain(b, ba);
  CHECK(max_abs_diff(out_ab, out_ba) > 1e-4);
}

TEST_CASE("sample_chain determinism and mask edge cases") {
  fx::FxChainConfig cfg;

  Rng r1(123), r2(123);
  const auto a = fx::sample_chain(cfg, r1);
  const auto b = fx::sample_chain(cfg, r2);
  CHECK(fx::chain_to_json(a) == fx::chain_to_json(b));

  cfg.probabilities.fill(0.0);
  Rng r3(5);
  const auto none = fx::sample_chain(cfg, r3);
  CHECK(none.empty());
  const auto buf = noise(0.02, 54, 0.2);
  CHECK(max_abs_diff(fx::apply_chain(buf, none), buf) == 0.0);

  cfg.probabilities.fill(1.0);
  Rng r4(6);
  const auto all = fx::sample_chain(cfg, r4);
  for (bool applied : all.applied) CHECK(applied);
}

TEST_CASE("constrained permutation invariant and Monte Carlo rates") {
  fx::FxChainConfig cfg;
  cfg.probabilities.fill(0.5);
  Rng rng(2024);

  std::array<int, fx::kNumFx> applied_counts{};
  int swap12 = 0, swap34 = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto inst = fx::sample_chain(cfg, rng);
    inst.validate();  // slots 1-2 = {EQ, DRC}, 3-4 = {pan, imager}, reverb 5th, loudness 6th
    for (int f = 0; f < fx::kNumFx; ++f)
      if (inst.applied[static_cast<size_t>(f)]) applied_counts[static_cast<size_t>(f)]++;
    if (inst.order[0] == fx::FxKind::kDrc) ++swap12;
    if (inst.order[2] == fx::FxKind::kImager) ++swap34;
  }
  for (int f = 0; f < fx::kNumFx; ++f) {
    const double rate = static_cast<double>(applied_counts[static_cast<size_t>(f)]) / trials;
    CHECK(std::fabs(rate - 0.5) < 0.02);
  }
  CHECK(std::fabs(static_cast<double>(swap12) / trials - 0.5) < 0.02);
  CHECK(std::fabs(static_cast<double>(swap34) / trials - 0.5) < 0.02);
}

TEST_CASE("chain serialization round-trips") {
  fx::FxChainConfig cfg;
  Rng rng(321);
  const auto inst = fx::sample_chain(cfg, rng);
  const auto text = fx::chain_to_json(inst);
  const auto back = fx::chain_from_json(text);
  CHECK(fx::chain_to_json(back) == text);
}

TEST_CASE("processors map finite input to finite output across sampled params") {
  fx::FxChainConfig cfg;
  cfg.ranges.reverb_rt60_lo = 0.1;
  cfg.ranges.reverb_rt60_hi = 0.3;  // keep the test quick
  Rng rng(777);
  const auto b = noise(0.3, 55, 0.8);
  for (int t = 0; t < 8; ++t) {
    const auto inst = fx::sample_chain(cfg, rng);
    const auto out = fx::apply_chain(b, inst);
    CHECK(audio::all_finite(out));
    CHECK(out.length() == b.length());
  }
}
